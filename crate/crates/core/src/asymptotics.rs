//! Leading constants of fair counting functions over `Q`, and the Euler products governing
//! complete splitting of a fixed prime in `Z/p^2`-extensions ordered by discriminant.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{divisors, for_each_prime_in, gcd, pow_mod, prime_divisors, totient};
use crate::characters::{local_characters, local_specs, Place};
use crate::counting::{discriminant_counting, CountingFunction};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::interval::{prime_power_weight, Interval};
use crate::stats::{empirical_conditional, Event, PlaceCondition, ProbabilityEstimate};
use crate::units::unit_group;
use crate::viability;

/// `sum over g in M of 1 / phi(r_g)`: over `Q` this is the number of minimal-weight
/// divisions, so the denominator is always 1.
pub fn pole_order(c: &CountingFunction) -> Ratio<u64> {
    let g = c.group();
    c.minimal_set()
        .iter()
        .map(|x| Ratio::new(1, totient(g.element_order(x))))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductMode {
    /// Divide out Dirichlet L-factors at 1 and multiply by the L-values; certified tail.
    Accelerated,
    /// Plain product in increasing prime order; no tail bound.
    Direct,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalFactor {
    pub prime: u64,
    pub factor: Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantReport {
    pub m: u32,
    pub w: u64,
    pub sp: u64,
    pub e_order: u64,
    /// `prod_i |{+-1} / {+-1}^{n_i}|`.
    pub unit_index: u64,
    /// `|G[2]|`.
    pub infinite_factor: u64,
    /// `|G|^{|S_0|}`, dividing the viable-spec sum at `S_0`.
    pub s0_divisor: u64,
    pub prefactor: Interval,
    /// Product of `L(1, chi)` over nontrivial characters mod the orders of minimal divisions.
    pub l_values: Option<Interval>,
    /// Local factors at primes below 100, for inspection.
    pub local_factors: Vec<LocalFactor>,
    pub truncation: u64,
    pub partial_product: Interval,
    pub tail: Option<Interval>,
    pub mode: ProductMode,
    pub certified: bool,
    pub value: Interval,
}

/// Tame local weights grouped by `d = gcd(p - 1, exp)`: for each divisor `d` of the exponent,
/// the weights `c(h)` of elements `h` with order dividing `d`.
fn tame_weight_table(c: &CountingFunction) -> Vec<(u64, Vec<(u32, u64)>)> {
    let g = c.group();
    divisors(g.exponent())
        .into_iter()
        .map(|d| {
            let mut counts: std::collections::BTreeMap<u32, u64> = Default::default();
            for (i, x) in g.elements().enumerate() {
                if d % g.element_order(&x) == 0 {
                    let w = if x.is_zero() { 0 } else { c.element_weight_by_index(i) };
                    *counts.entry(w).or_default() += 1;
                }
            }
            (d, counts.into_iter().collect())
        })
        .collect()
}

fn weighted_sum(p: u64, weights: &[(u32, u64)], m: u32) -> Interval {
    weights
        .iter()
        .fold(Interval::point(0.0), |acc, &(w, k)| acc + prime_power_weight(p, w, m) * Interval::point(k as f64))
}

/// Characters of `(Z/r)^x` as exponent vectors on the generators.
fn characters_mod(r: u64) -> Result<(crate::units::UnitGroupStructure, Vec<Vec<u64>>)> {
    let u = unit_group(r)?;
    let mut out = vec![Vec::new()];
    for &o in &u.orders {
        out = out
            .into_iter()
            .flat_map(|v| (0..o).map(move |k| {
                let mut w = v.clone();
                w.push(k);
                w
            }))
            .collect();
    }
    Ok((u, out))
}

fn char_value(u: &crate::units::UnitGroupStructure, k: &[u64], x: u64) -> Result<Complex64> {
    let logs = u.discrete_log(x)?;
    let t: f64 = logs.iter().zip(k).zip(&u.orders).map(|((l, k), o)| (l * k % o) as f64 / *o as f64).sum();
    Ok(Complex64::from_polar(1.0, 2.0 * PI * t))
}

/// `L(1, chi)` for a primitive character mod `f > 1` given as a table on `0..f`, by Gauss's
/// digamma formula.
fn l_one_primitive(f: u64, chi: &[Complex64]) -> Complex64 {
    let ff = f as f64;
    let lnsin: Vec<f64> = (1..=(f - 1) / 2).map(|n| (PI * n as f64 / ff).sin().ln()).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..f {
        if chi[a as usize] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let x = a as f64 / ff;
        let mut t = 0.5 * PI / (PI * x).tan();
        for (i, ls) in lnsin.iter().enumerate() {
            t -= 2.0 * (2.0 * PI * (i + 1) as f64 * x).cos() * ls;
        }
        acc += chi[a as usize] * t;
    }
    acc / ff
}

/// `prod over nontrivial chi mod r of L(1, chi)`.
pub fn l_value_product(r: u64) -> Result<f64> {
    let (u, chars) = characters_mod(r)?;
    let units: Vec<u64> = (1..r).filter(|&x| gcd(x, r) == 1).collect();
    let mut prod = Complex64::new(1.0, 0.0);
    for k in chars.iter().filter(|k| k.iter().any(|&x| x != 0)) {
        let vals: Vec<(u64, Complex64)> = units.iter().map(|&x| Ok((x, char_value(&u, k, x)?))).collect::<Result<_>>()?;
        let one = |z: Complex64| (z - 1.0).norm() < 1e-9;
        let f = divisors(r)
            .into_iter()
            .find(|&f| vals.iter().all(|&(x, v)| x % f != 1 % f || one(v)))
            .expect("r itself works");
        let mut table = vec![Complex64::new(0.0, 0.0); f as usize];
        for &(x, v) in &vals {
            table[(x % f) as usize] = v;
        }
        let mut l = l_one_primitive(f, &table);
        for q in prime_divisors(r) {
            if f % q != 0 {
                l *= Complex64::new(1.0, 0.0) - table[(q % f) as usize] / q as f64;
            }
        }
        prod *= l;
    }
    if prod.im.abs() > 1e-8 * prod.norm() {
        return Err(Error::Consistency(format!("L-value product mod {r} is not real: {prod}")));
    }
    Ok(prod.re)
}

/// `prod over nontrivial chi mod r of (1 - chi(p)/p)` for `p` not dividing `r`:
/// `(1 - p^{-f})^{phi(r)/f} / (1 - 1/p)` with `f` the order of `p` mod `r`.
fn nontrivial_l_factor(p: u64, r: u64) -> Interval {
    let phi = totient(r);
    let mut f = 1u64;
    let mut x = p % r;
    while x != 1 % r {
        x = x * (p % r) % r;
        f += 1;
    }
    let one = Interval::point(1.0);
    let inv_p = Interval::point(p as f64).recip();
    let pf = inv_p.powi(f as u32);
    (one - pf).powi((phi / f) as u32) / (one - inv_p)
}

/// Leading constant `c` in `#{surjective chi : C(chi) < X} ~ c X^{1/m} (log X)^{w-1}`.
pub fn leading_constant(c: &CountingFunction, truncation: u64, mode: ProductMode) -> Result<ConstantReport> {
    c.require_fair()?;
    let g = c.group();
    let n = g.order();
    let m = c.min_weight();
    let w_rat = pole_order(c);
    if !w_rat.is_integer() {
        return Err(Error::Consistency(format!("pole order {w_rat} is not an integer")));
    }
    let w = w_rat.to_integer();
    let wild: Vec<u64> = prime_divisors(n);
    if truncation < wild.iter().copied().max().unwrap_or(2).max(2) {
        return Err(Error::InvalidArgument("truncation must cover every prime dividing |G|".into()));
    }
    let s0 = viability::s0(g);
    let sp = viability::sp(g);
    let e_order = viability::e_group(c)?.order;
    let unit_index = 1u64 << g.factors().iter().filter(|&&k| k % 2 == 0).count();
    let infinite_factor = local_specs(g, Place::Infinity).len() as u64;
    let s0_divisor = n.pow(s0.len() as u32);
    let fact: u64 = (1..w).product();
    let prefactor = Interval::point(sp as f64)
        / (Interval::point(m as f64).powi((w - 1) as u32)
            * Interval::point(fact as f64)
            * Interval::point(s0_divisor as f64)
            * Interval::point(unit_index as f64));

    let div_orders: Vec<u64> = {
        let mut v: Vec<u64> = c.minimal_divisions().iter().map(|d| g.element_order(d.representative())).collect();
        v.sort_unstable();
        v
    };
    let accelerated = mode == ProductMode::Accelerated;
    let l_values = if accelerated {
        let mut prod = 1.0;
        for &r in &div_orders {
            prod *= l_value_product(r)?;
        }
        Some(Interval::around(prod, prod.abs() * 1e-9))
    } else {
        None
    };

    let table = tame_weight_table(c);
    let exp = g.exponent();
    let one = Interval::point(1.0);
    let mut partial = Interval::point(1.0);
    let mut local_factors = Vec::new();
    let mut err = None;
    for_each_prime_in(2, truncation + 1, |p| {
        if err.is_some() {
            return;
        }
        let sum = if s0.contains(&p) {
            local_specs(g, Place::Finite(p))
                .iter()
                .filter(|s| viability::spec_viable_over_q(g, s))
                .fold(Interval::point(0.0), |acc, s| acc + prime_power_weight(p, c.spec_weight(s), m))
        } else if wild.contains(&p) {
            local_characters(g, p)
                .iter()
                .fold(Interval::point(0.0), |acc, chi| acc + prime_power_weight(p, c.local_weight(chi), m))
        } else {
            let d = gcd(p - 1, exp);
            let weights = &table.iter().find(|(dd, _)| *dd == d).expect("divisor of exponent").1;
            weighted_sum(p, weights, m)
        };
        let mut f = sum * (one - Interval::point(p as f64).recip()).powi(w as u32);
        if accelerated {
            for &r in &div_orders {
                if r % p != 0 && r > 1 {
                    f = f * nontrivial_l_factor(p, r);
                }
            }
        }
        if f.lo <= 0.0 {
            err = Some(Error::Consistency(format!("nonpositive local factor at {p}")));
        }
        if p < 100 {
            local_factors.push(LocalFactor { prime: p, factor: f });
        }
        partial = partial * f;
    });
    if let Some(e) = err {
        return Err(e);
    }
    let tail = accelerated.then(|| {
        let nm = c.minimal_set().len() as f64;
        let nn = truncation as f64;
        let k2 = (n as f64 - 1.0).powi(2) / 2.0 + nm;
        let first = (n as f64 - 1.0 - nm) * m as f64 * nn.powf(-1.0 / m as f64);
        let lo = -(k2 / nn) * 1.000001;
        let hi = (first + k2 / nn) * 1.000001;
        Interval::new(lo, hi).exp()
    });
    let mut value = prefactor * Interval::point(infinite_factor as f64) * partial;
    if let Some(l) = l_values {
        value = value * l;
    }
    if let Some(t) = tail {
        value = value * t;
    }
    Ok(ConstantReport {
        m,
        w,
        sp,
        e_order,
        unit_index,
        infinite_factor,
        s0_divisor,
        prefactor,
        l_values,
        local_factors,
        truncation,
        partial_product: partial,
        tail,
        mode,
        certified: accelerated,
        value,
    })
}

/// Whether `q` is a `p`-th power in `Q_l` (`l` prime, `l != p, q`).
pub fn is_pth_power_in_ql(q: u64, l: u64, p: u64) -> Result<bool> {
    if l == p || l == q {
        return Err(Error::InvalidArgument(format!("l = {l} must differ from p and q")));
    }
    if !(l - 1).is_multiple_of(p) {
        return Ok(true);
    }
    Ok(pow_mod(q % l, (l - 1) / p, l) == 1)
}

/// How the prime `l = p` enters the products `r` and `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WildPlaceTreatment {
    /// Products over tame `l = 1 mod p^2` only.
    #[default]
    Excluded,
    /// Also include `l = p` with the tame-shaped factor.
    TameShaped,
    /// Also include `l = p` with its exact local generating function.
    ExactLocal,
}

/// Which tail bound to apply beyond the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TailBound {
    /// Sums over all integers beyond `N`: `S = p N^{-1/p}`.
    #[default]
    Integers,
    /// Sums over integers `= 1 mod p^2` beyond `N`; still rigorous, much tighter.
    Progression,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailEnclosure {
    pub p: u64,
    pub truncation: u64,
    pub bound: TailBound,
    /// Bound on `sum over l > N of l^{-(p+1)/p}`.
    pub sum_bound: f64,
    /// Tail of `rho` lies in `[lower, upper]`; tail of `r` in `[1/upper, 1]`.
    pub lower: Interval,
    pub upper: Interval,
    /// Tail of `Pi_s` (every factor below 1) lies in `[pi_s_lower, 1]`.
    pub pi_s_lower: Interval,
}

/// `sum over n > N, n = 1 mod M of n^{-a}` is at most `N^{-a} + (1/M) * N^{1-a}/(a-1)`.
fn progression_sum(n: f64, a: f64, modulus: f64) -> f64 {
    n.powf(-a) + n.powf(1.0 - a) / ((a - 1.0) * modulus)
}

/// Enclosure of the tail products beyond `N`.
///
/// Upper factor `(1 + S)^{p^2-p}` with `S = p N^{-1/p}`; this dominates `exp((p^2-p) T)`
/// where `T` is the progression sum, which is checked. Lower factor
/// `exp(-(p^2-p) S / (1 - x_N))` with `x_N = (p^2-p) N^{-(p+1)/p}`.
pub fn tail_enclosure(p: u64, truncation: u64, bound: TailBound) -> Result<TailEnclosure> {
    if truncation < 2 {
        return Err(Error::InvalidArgument("truncation must be at least 2".into()));
    }
    let (pf, nf) = (p as f64, truncation as f64);
    let a = (pf + 1.0) / pf;
    let k = pf * pf - pf;
    let xn = k * nf.powf(-a);
    if xn >= 0.5 {
        return Err(Error::InvalidArgument("truncation too small for the tail bound".into()));
    }
    let prog = progression_sum(nf, a, pf * pf) * 1.000001;
    let y_n = pf * nf.powf(-a);
    let (sum_bound, lower, upper) = match bound {
        TailBound::Integers => {
            let s = pf * nf.powf(-1.0 / pf) * 1.000001;
            let upper = (Interval::point(1.0) + Interval::approx(s)).powi(k as u32);
            let rigorous = Interval::approx(k * prog).exp();
            let upper = if rigorous.hi > upper.hi { rigorous } else { upper };
            (s, Interval::approx(-k * s / (1.0 - xn)).exp(), upper)
        }
        TailBound::Progression => (
            prog,
            Interval::approx(-k * prog / (1.0 - xn)).exp(),
            Interval::approx(k * prog).exp(),
        ),
    };
    let pi_s_lower = Interval::approx(-pf * pf * sum_bound / (1.0 - y_n)).exp();
    Ok(TailEnclosure {
        p,
        truncation,
        bound,
        sum_bound,
        lower: Interval::point(lower.lo),
        upper: Interval::point(upper.hi),
        pi_s_lower: Interval::point(pi_s_lower.lo),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerProductValue {
    pub lo: f64,
    pub hi: f64,
    pub truncation: u64,
    pub ordering: &'static str,
    pub partial: Interval,
    pub tail: TailEnclosure,
}

impl EulerProductValue {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

struct DiscProducts {
    rho: Interval,
    r: Interval,
    pi_s: Interval,
}

/// Truncated `rho = Pi_s / r` and `r`, with `l = p` handled per `treatment`.
fn disc_products(p: u64, q: u64, truncation: u64, treatment: WildPlaceTreatment) -> Result<DiscProducts> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument("p must be an odd prime".into()));
    }
    if !crate::arith::is_prime(q) {
        return Err(Error::InvalidArgument("q must be prime".into()));
    }
    let pf = Interval::point(p as f64);
    let one = Interval::point(1.0);
    let pm1 = Interval::point((p - 1) as f64);
    let k = Interval::point((p * p - p) as f64);
    let expo = -((p + 1) as f64) / p as f64;
    let mut rho = one;
    let mut r = one;
    let mut pi_s = one;
    let mut tame = |l: u64| -> Result<()> {
        let lf = Interval::point(l as f64);
        let a = pm1 / lf;
        let u = lf.powf_pos(expo);
        let x = k * u;
        let y = pf * u;
        r = r * ((one + a) / (one + a + x));
        if is_pth_power_in_ql(q, l, p)? {
            rho = rho * ((one + a + x) / (one + a));
        } else {
            rho = rho * ((one + a - y) / (one + a));
            pi_s = pi_s * ((one + a - y) / (one + a + x));
        }
        Ok(())
    };
    let p2 = p * p;
    let mut err = Ok(());
    for_each_prime_in(2, truncation + 1, |l| {
        if err.is_ok() && l % p2 == 1 && l != q {
            err = tame(l);
        }
    });
    err?;
    if q != p {
        let q_is_power_at_p = pow_mod(q % p2, p - 1, p2) == 1;
        match treatment {
            WildPlaceTreatment::Excluded => {}
            WildPlaceTreatment::TameShaped => {
                let a = pm1 / pf;
                let u = pf.powf_pos(expo);
                let (x, y) = (k * u, pf * u);
                r = r * ((one + a) / (one + a + x));
                if q_is_power_at_p {
                    rho = rho * ((one + a + x) / (one + a));
                } else {
                    rho = rho * ((one + a - y) / (one + a));
                    pi_s = pi_s * ((one + a - y) / (one + a + x));
                }
            }
            WildPlaceTreatment::ExactLocal => {
                let w_sub = one + pm1 / (pf * pf);
                let top = pf.powf_pos(-3.0 - 2.0 / p as f64);
                let w_all = w_sub + k * top;
                let w_tw = if q_is_power_at_p { w_all } else { w_sub - pf * top };
                r = r * (w_sub / w_all);
                rho = rho * (w_tw / w_sub);
                pi_s = pi_s * (w_tw / w_all);
            }
        }
    }
    Ok(DiscProducts { rho, r, pi_s })
}

fn wrap(v: Interval, truncation: u64, partial: Interval, tail: TailEnclosure) -> EulerProductValue {
    EulerProductValue { lo: v.lo, hi: v.hi, truncation, ordering: "increasing primes", partial, tail }
}

/// Interval for `r`.
pub fn disc_prob_r(p: u64, q: u64, truncation: u64, treatment: WildPlaceTreatment, bound: TailBound) -> Result<EulerProductValue> {
    let d = disc_products(p, q, truncation, treatment)?;
    let t = tail_enclosure(p, truncation, bound)?;
    let v = Interval::new((d.r / t.upper).lo, d.r.hi);
    Ok(wrap(v, truncation, d.r, t))
}

fn rho_interval(d: &DiscProducts, t: &TailEnclosure) -> Interval {
    Interval::new((d.rho * t.lower).lo, (d.rho * t.upper).hi)
}

/// Interval for `s = (1 + (p-1) Pi_s) / p^2`.
pub fn disc_prob_s(p: u64, q: u64, truncation: u64, treatment: WildPlaceTreatment, bound: TailBound) -> Result<EulerProductValue> {
    let d = disc_products(p, q, truncation, treatment)?;
    let t = tail_enclosure(p, truncation, bound)?;
    let pi_s = Interval::new((d.pi_s * t.pi_s_lower).lo, d.pi_s.hi);
    let p2 = Interval::point((p * p) as f64);
    let pm1 = Interval::point((p - 1) as f64);
    let s = (Interval::point(1.0) + pm1 * pi_s) / p2;
    let partial = (Interval::point(1.0) + pm1 * d.pi_s) / p2;
    Ok(wrap(s, truncation, partial, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitVerdict {
    /// Certified `p^2 s_1 < 1`.
    BelowOneOverP2,
    /// Certified `p^2 s_1 > 1`.
    AboveOneOverP2,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct S1Report {
    pub p: u64,
    pub q: u64,
    pub truncation: u64,
    pub treatment: WildPlaceTreatment,
    pub s: EulerProductValue,
    pub r: EulerProductValue,
    /// `(p^2 s - 1) / ((p-1) r)`, the quantity compared against 1.
    pub ratio: Interval,
    /// `p^2 s_1`.
    pub scaled_s1: Interval,
    pub s1: Interval,
    pub verdict: SplitVerdict,
    /// Whether the certified upper end of `ratio` is at most 0.97.
    pub ratio_at_most_097: bool,
}

/// `p^2 s_1 = 1 + (p-1) r (rho - 1) / (1 - r)`, monotone in each of `rho` and `r`, so the
/// extremes over a box are at its corners.
pub fn scaled_s1_from(p: u64, rho: Interval, r: Interval) -> Result<Interval> {
    if r.hi >= 1.0 || r.lo < 0.0 {
        return Err(Error::InvalidArgument("r must lie in [0, 1)".into()));
    }
    let pm1 = Interval::point((p - 1) as f64);
    let one = Interval::point(1.0);
    let corners = [(rho.lo, r.lo), (rho.lo, r.hi), (rho.hi, r.lo), (rho.hi, r.hi)].map(|(a, b)| {
        let (a, b) = (Interval::point(a), Interval::point(b));
        one + pm1 * b * (a - one) / (one - b)
    });
    Ok(corners.iter().skip(1).fold(corners[0], |acc, x| acc.hull(x)))
}

/// `s_1 = (s - r/p) / (1 - r)` directly.
pub fn s1_from(p: u64, s: Interval, r: Interval) -> Interval {
    (s - r / Interval::point(p as f64)) / (Interval::point(1.0) - r)
}

pub fn disc_prob_s1(p: u64, q: u64, truncation: u64, treatment: WildPlaceTreatment, bound: TailBound) -> Result<S1Report> {
    let d = disc_products(p, q, truncation, treatment)?;
    let t = tail_enclosure(p, truncation, bound)?;
    let r_iv = Interval::new((d.r / t.upper).lo, d.r.hi);
    let rho = rho_interval(&d, &t);
    let scaled = scaled_s1_from(p, rho, r_iv)?;
    let p2 = Interval::point((p * p) as f64);
    let verdict = if scaled.hi < 1.0 {
        SplitVerdict::BelowOneOverP2
    } else if scaled.lo > 1.0 {
        SplitVerdict::AboveOneOverP2
    } else {
        SplitVerdict::Inconclusive
    };
    Ok(S1Report {
        p,
        q,
        truncation,
        treatment,
        s: disc_prob_s(p, q, truncation, treatment, bound)?,
        r: disc_prob_r(p, q, truncation, treatment, bound)?,
        ratio: rho,
        scaled_s1: scaled,
        s1: scaled / p2,
        verdict,
        ratio_at_most_097: rho.hi <= 0.97,
    })
}

/// `Pr(q splits completely | q unramified)` among `Z/p^2`-extensions ordered by
/// discriminant, at `X`, `2X`, `4X`.
pub fn empirical_disc_prob(p: u64, q: u64, bound: u128, threads: usize) -> Result<ProbabilityEstimate> {
    let g = FiniteAbelianGroup::cyclic(p * p)?;
    let c = discriminant_counting(&g);
    let split = Event::new(vec![PlaceCondition { frob: Some(g.zero()), ..PlaceCondition::unramified(q) }])?;
    let given = Event::new(vec![PlaceCondition::unramified(q)])?;
    empirical_conditional(&c, bound, &split, &given, threads)
}
