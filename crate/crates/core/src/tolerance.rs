//! Floating-point acceptance policy.
//!
//! An identity `S = V` between sums of unit-modulus terms is accepted when
//! `|S - V| <= tol * max(1, terms)`. Sums with a natural scale (counts,
//! sphere sizes) are divided by that scale first. Inequalities `a <= b`
//! between positive quantities get a relative margin `tol * max(|a|, |b|)`.

/// Default tolerance, `1e-8`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

impl Tolerance {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Allowed absolute error for a sum of `terms` unit-size terms.
    pub fn budget(self, terms: usize) -> f64 {
        self.0 * (terms.max(1) as f64)
    }

    /// `|a - b| <= tol * max(1, terms) * scale`.
    pub fn identity(self, a: f64, b: f64, terms: usize, scale: f64) -> bool {
        (a - b).abs() <= self.budget(terms) * scale.max(f64::MIN_POSITIVE)
    }

    /// `lhs <= rhs` up to a relative margin.
    pub fn leq(self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + self.0 * lhs.abs().max(rhs.abs())
    }
}
