//! Closed real intervals, enough to bound monomials over a box.

use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Exact range of `x^k` over the interval.
    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Self::point(1.0);
        }
        let a = self.lo.powi(k as i32);
        let b = self.hi.powi(k as i32);
        if k % 2 == 1 || self.lo >= 0.0 {
            Self::new(a, b)
        } else if self.hi <= 0.0 {
            Self::new(b, a)
        } else {
            Self::new(0.0, a.max(b))
        }
    }

    /// Support of `c·x` over the interval.
    pub fn support(&self, c: f64) -> f64 {
        (c * self.lo).max(c * self.hi)
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        Interval::new(
            p.iter().copied().fold(f64::INFINITY, f64::min),
            p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Range of a monomial over a box.
pub fn monomial_range(exponents: &[u32], bounds: &[Interval]) -> Interval {
    exponents
        .iter()
        .zip(bounds)
        .fold(Interval::point(1.0), |acc, (&e, &iv)| acc * iv.powi(e))
}
