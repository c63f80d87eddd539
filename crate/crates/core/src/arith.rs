//! Elementary number theory on machine integers.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes, primes `< n`.
pub fn primes_below(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let n = n as usize;
    let mut comp = vec![false; n];
    let mut out = Vec::new();
    for i in 2..n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j < n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Calls `f` on every prime in `[lo, hi)` in increasing order, using a segmented sieve.
pub fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    if hi <= 2 || hi <= lo {
        return;
    }
    let lo = lo.max(2);
    let root = isqrt(hi - 1) + 1;
    let small = primes_below(root + 1);
    const SEG: u64 = 1 << 18;
    let mut start = lo;
    let mut comp = vec![false; SEG as usize];
    while start < hi {
        let end = (start + SEG).min(hi);
        let len = (end - start) as usize;
        comp[..len].iter_mut().for_each(|c| *c = false);
        for &p in &small {
            if p * p >= end {
                break;
            }
            let mut m = (start.div_ceil(p) * p).max(p * p);
            while m < end {
                comp[(m - start) as usize] = true;
                m += p;
            }
        }
        for i in 0..len {
            if !comp[i] {
                f(start + i as u64);
            }
        }
        start = end;
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Largest `r` with `r^k <= n`.
pub fn iroot_u128(n: u128, k: u32) -> u128 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64) as u128;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

/// Smallest primitive root modulo an odd prime `p` that is also a primitive root modulo `p^2`
/// (hence modulo every power of `p`). For `p = 2` returns 1.
pub fn primitive_root_prime_power(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs = prime_divisors(p - 1);
    let mut g = 2;
    loop {
        if qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1) {
            break;
        }
        g += 1;
    }
    let p2 = p as u128 * p as u128;
    if p2 <= u64::MAX as u128 {
        let p2 = p2 as u64;
        if pow_mod(g, p - 1, p2) == 1 {
            g += p;
        }
    }
    g
}

/// Parses an exact non-negative integer written plainly or in scientific notation
/// such as `1e5` or `1.6e6`.
pub fn parse_scientific(s: &str) -> Option<u128> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: String = format!("{int}{frac}");
    let shift = exp - frac.len() as i32;
    let mut v: u128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    if shift >= 0 {
        for _ in 0..shift {
            v = v.checked_mul(10)?;
        }
    } else {
        for _ in 0..(-shift) {
            if !v.is_multiple_of(10) {
                return None;
            }
            v /= 10;
        }
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_divisors() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(totient(36), 12);
    }

    #[test]
    fn segmented_sieve_matches_plain() {
        let plain: Vec<u64> = primes_below(100_000).into_iter().filter(|&p| p >= 1000).collect();
        let mut seg = Vec::new();
        for_each_prime_in(1000, 100_000, |p| seg.push(p));
        assert_eq!(plain, seg);
        assert!(seg.iter().all(|&p| is_prime(p)));
    }

    #[test]
    fn primitive_roots_lift() {
        for p in primes_below(2000).into_iter().skip(1) {
            let g = primitive_root_prime_power(p);
            let m = p * p;
            let phi = p * (p - 1);
            for q in prime_divisors(phi) {
                assert_ne!(pow_mod(g, phi / q, m), 1, "p = {p}");
            }
        }
    }

    #[test]
    fn scientific() {
        assert_eq!(parse_scientific("1e5"), Some(100_000));
        assert_eq!(parse_scientific("1.6e6"), Some(1_600_000));
        assert_eq!(parse_scientific("13"), Some(13));
        assert_eq!(parse_scientific("1.5"), None);
        assert_eq!(parse_scientific("1e36"), Some(10u128.pow(36)));
    }

    #[test]
    fn roots() {
        assert_eq!(iroot_u128(10u128.pow(36) - 1, 6), 999_999);
        assert_eq!(iroot_u128(10u128.pow(36), 6), 1_000_000);
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
    }
}
