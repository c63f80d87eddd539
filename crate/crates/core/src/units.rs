//! Structure of `(Z/m)^x` and discrete logarithms in it.

use std::collections::HashMap;

use crate::arith::{factorize, gcd, inv_mod, isqrt, mul_mod, pow_mod, primitive_root_prime_power};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Component {
    /// Odd prime power, cyclic with the given generator.
    Odd { p: u64, pk: u64, g: u64, order: u64 },
    /// `2^k`, `k >= 2`: generated by -1 and (for `k >= 3`) by 5.
    Two { k: u32, pk: u64 },
}

/// Canonical generators of `(Z/m)^x` with their orders. For `m = p^k` these are a primitive
/// root (odd `p`), or `-1` and `5` for powers of two; composite moduli are assembled by CRT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    components: Vec<Component>,
}

/// Structure of `(Z/m)^x` for `m >= 1`.
pub fn unit_group(m: u64) -> Result<UnitGroupStructure> {
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut components = Vec::new();
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for (p, k) in factorize(m) {
        let pk = p.pow(k);
        let rest = m / pk;
        // x = a mod pk, 1 mod rest
        let lift = |a: u64| -> u64 {
            if rest == 1 {
                return a % pk;
            }
            let inv = inv_mod(rest % pk, pk).expect("coprime moduli");
            // x = 1 + rest * t with t = (a - 1) * rest^{-1} mod pk
            let t = mul_mod((a + pk - 1) % pk, inv, pk);
            ((1 + rest as u128 * t as u128) % m as u128) as u64
        };
        if p == 2 {
            if k >= 2 {
                components.push(Component::Two { k, pk });
                generators.push(lift(pk - 1));
                orders.push(2);
                if k >= 3 {
                    generators.push(lift(5));
                    orders.push(1 << (k - 2));
                }
            }
        } else {
            let g = primitive_root_prime_power(p);
            let order = pk / p * (p - 1);
            components.push(Component::Odd { p, pk, g, order });
            generators.push(lift(g));
            orders.push(order);
        }
    }
    Ok(UnitGroupStructure { modulus: m, generators, orders, components })
}

impl UnitGroupStructure {
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponent vector of `x` with respect to [`Self::generators`].
    pub fn discrete_log(&self, x: u64) -> Result<Vec<u64>> {
        let m = self.modulus;
        if m == 1 {
            return Ok(Vec::new());
        }
        let x = x % m;
        if gcd(x, m) != 1 {
            return Err(Error::NotAUnit(x, m));
        }
        let mut out = Vec::with_capacity(self.generators.len());
        for c in &self.components {
            match *c {
                Component::Odd { pk, g, order, .. } => {
                    out.push(dlog_cyclic(x % pk, g, order, pk));
                }
                Component::Two { k, pk } => {
                    let y = x % pk;
                    let sign = if y % 4 == 3 { 1 } else { 0 };
                    out.push(sign);
                    if k >= 3 {
                        let y = if sign == 1 { pk - y } else { y };
                        out.push(dlog_cyclic(y, 5, 1 << (k - 2), pk));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Discrete log of `x` to base `g`, where `g` has order `n` modulo `m` and `x` lies in `<g>`.
/// Pohlig-Hellman over the prime powers of `n`, with baby-step giant-step for each digit.
pub fn dlog_cyclic(x: u64, g: u64, n: u64, m: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut residues = Vec::new();
    for (q, e) in factorize(n) {
        let qe = q.pow(e);
        let cofactor = n / qe;
        let gq = pow_mod(g, cofactor, m);
        let xq = pow_mod(x, cofactor, m);
        // gq has order q^e; recover the digits of log_gq(xq) in base q.
        let gamma = pow_mod(gq, qe / q, m);
        let gq_inv = inv_mod(gq, m).expect("unit");
        let mut digits_value = 0u64;
        let mut qpow = 1u64;
        for _ in 0..e {
            // h = (xq * gq^{-digits_value})^{q^{e-1-i}}
            let t = mul_mod(xq, pow_mod(gq_inv, digits_value, m), m);
            let h = pow_mod(t, qe / (qpow * q), m);
            let d = bsgs(h, gamma, q, m);
            digits_value += d * qpow;
            qpow *= q;
        }
        residues.push((digits_value, qe));
    }
    crt(&residues)
}

/// Solves `base^k = target` for `0 <= k < order`.
fn bsgs(target: u64, base: u64, order: u64, m: u64) -> u64 {
    if order <= 64 {
        let mut cur = 1u64;
        for k in 0..order {
            if cur == target {
                return k;
            }
            cur = mul_mod(cur, base, m);
        }
        panic!("discrete logarithm does not exist");
    }
    let s = isqrt(order) + 1;
    let mut table = HashMap::with_capacity(s as usize);
    let mut cur = 1u64;
    for j in 0..s {
        table.entry(cur).or_insert(j);
        cur = mul_mod(cur, base, m);
    }
    let factor = inv_mod(pow_mod(base, s, m), m).expect("unit");
    let mut gamma = target;
    for i in 0..=s {
        if let Some(&j) = table.get(&gamma) {
            return (i * s + j) % order;
        }
        gamma = mul_mod(gamma, factor, m);
    }
    panic!("discrete logarithm does not exist");
}

fn crt(residues: &[(u64, u64)]) -> u64 {
    let mut x = 0u128;
    let mut modulus = 1u128;
    for &(r, m) in residues {
        // x' = x + modulus * t, x' = r mod m
        let inv = inv_mod((modulus % m as u128) as u64, m).expect("coprime") as u128;
        let diff = (r as u128 + m as u128 - (x % m as u128)) % m as u128;
        let t = diff * inv % m as u128;
        x += modulus * t;
        modulus *= m as u128;
    }
    x as u64
}

/// `log_g(x) mod d` for a prime `p`, primitive root `g` and `d | p - 1`.
pub fn dlog_mod_divisor(x: u64, p: u64, g: u64, d: u64) -> u64 {
    if d == 1 {
        return 0;
    }
    let e = (p - 1) / d;
    let y = pow_mod(x, e, p);
    let h = pow_mod(g, e, p);
    let mut cur = 1u64;
    for j in 0..d {
        if cur == y {
            return j;
        }
        cur = mul_mod(cur, h, p);
    }
    unreachable!("x must be a unit modulo p")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_examples() {
        let u = unit_group(9).unwrap();
        assert_eq!((u.generators.clone(), u.orders.clone()), (vec![2], vec![6]));
        let u = unit_group(8).unwrap();
        assert_eq!((u.generators.clone(), u.orders.clone()), (vec![7, 5], vec![2, 2]));
        let u = unit_group(1).unwrap();
        assert!(u.generators.is_empty());
        let u = unit_group(2).unwrap();
        assert!(u.generators.is_empty());
        let u = unit_group(4).unwrap();
        assert_eq!((u.generators.clone(), u.orders.clone()), (vec![3], vec![2]));
    }

    #[test]
    fn dlog_examples() {
        let u = unit_group(7).unwrap();
        assert_eq!(u.generators, vec![3]);
        assert_eq!(u.discrete_log(2).unwrap(), vec![2]);
        assert_eq!(unit_group(8).unwrap().discrete_log(3).unwrap(), vec![1, 1]);
        assert_eq!(unit_group(9).unwrap().discrete_log(3), Err(Error::NotAUnit(3, 9)));
    }

    fn reconstruct(u: &UnitGroupStructure, e: &[u64]) -> u64 {
        u.generators
            .iter()
            .zip(e)
            .fold(1 % u.modulus, |acc, (&g, &k)| mul_mod(acc, pow_mod(g, k, u.modulus), u.modulus))
    }

    #[test]
    fn dlog_roundtrip_small_moduli() {
        for m in 1..600u64 {
            let u = unit_group(m).unwrap();
            let phi = crate::arith::totient(m);
            assert_eq!(u.order(), phi, "m = {m}");
            for x in 1..m.max(2) {
                if gcd(x, m) != 1 {
                    continue;
                }
                let e = u.discrete_log(x).unwrap();
                assert!(e.iter().zip(&u.orders).all(|(a, o)| a < o));
                assert_eq!(reconstruct(&u, &e), x % m, "m = {m}, x = {x}");
            }
        }
    }

    #[test]
    fn large_prime_uses_bsgs() {
        let p = 1_000_003u64;
        let u = unit_group(p).unwrap();
        for x in [2u64, 3, 999_999, 123_456] {
            let e = u.discrete_log(x).unwrap();
            assert_eq!(reconstruct(&u, &e), x);
        }
    }

    #[test]
    fn divisor_dlog_agrees() {
        for p in [7u64, 13, 19, 37, 73, 109] {
            let g = primitive_root_prime_power(p);
            let u = unit_group(p).unwrap();
            for d in crate::arith::divisors(p - 1) {
                for x in 1..p {
                    assert_eq!(dlog_mod_divisor(x, p, g, d), u.discrete_log(x).unwrap()[0] % d);
                }
            }
        }
    }
}
