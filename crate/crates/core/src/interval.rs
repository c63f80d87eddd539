//! Closed real intervals with outward rounding.
//!
//! Elementary operations round each endpoint one ulp outward. Library `exp`, `ln`, `powf`
//! are not correctly rounded, so their results are widened by a few ulps.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const LIBM_ULPS: u32 = 4;

fn down(x: f64, k: u32) -> f64 {
    (0..k).fold(x, |a, _| a.next_down())
}

fn up(x: f64, k: u32) -> f64 {
    (0..k).fold(x, |a, _| a.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "{lo} > {hi}");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// A point known only to within a few ulps.
    pub fn approx(x: f64) -> Self {
        Interval { lo: down(x, LIBM_ULPS), hi: up(x, LIBM_ULPS) }
    }

    /// `x` with absolute error at most `err`.
    pub fn around(x: f64, err: f64) -> Self {
        Interval { lo: (x - err).next_down(), hi: (x + err).next_up() }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, o: &Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn exp(self) -> Interval {
        Interval { lo: down(self.lo.exp(), LIBM_ULPS).max(0.0), hi: up(self.hi.exp(), LIBM_ULPS) }
    }

    /// Natural log of a positive interval.
    pub fn ln(self) -> Interval {
        Interval { lo: down(self.lo.ln(), LIBM_ULPS), hi: up(self.hi.ln(), LIBM_ULPS) }
    }

    /// `x^k` for a positive interval and integer `k >= 0`.
    pub fn powi(self, k: u32) -> Interval {
        (0..k).fold(Interval::point(1.0), |a, _| a * self)
    }

    /// `b^e` for positive `b`; monotone in the base.
    pub fn powf_pos(self, e: f64) -> Interval {
        let (a, b) = (down(self.lo.powf(e), LIBM_ULPS), up(self.hi.powf(e), LIBM_ULPS));
        if e >= 0.0 { Interval { lo: a, hi: b } } else { Interval { lo: down(self.hi.powf(e), LIBM_ULPS), hi: up(self.lo.powf(e), LIBM_ULPS) } }
    }

    pub fn recip(self) -> Interval {
        assert!(self.lo > 0.0 || self.hi < 0.0, "reciprocal of an interval containing 0");
        Interval { lo: (1.0 / self.hi).next_down(), hi: (1.0 / self.lo).next_up() }
    }
}

/// `p^{-c/m}` enclosed.
pub fn prime_power_weight(p: u64, c: u32, m: u32) -> Interval {
    if c.is_multiple_of(m) {
        let k = c / m;
        return Interval::point(p as f64).powi(k).recip();
    }
    Interval::point(p as f64).powf_pos(-(c as f64) / m as f64)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        self * o.recip()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}
