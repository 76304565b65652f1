//! Numeric comparison policy.
//!
//! Instances whose expertise levels are all integers are compared exactly
//! (integer sums and maxima are exact in an f64). Real-valued instances use
//! strict comparisons with an absolute epsilon so that "benefits" and
//! "blocks" never hinge on rounding noise.

use std::cmp::Ordering;

/// Greedy approximation guarantee, 1 - 1/e.
pub const ONE_MINUS_INV_E: f64 = 0.6321205588285577;

/// Default absolute tolerance for real-valued instances.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueCmp {
    /// Bitwise f64 comparison; sound when every value is an integer.
    Exact,
    /// Strict comparisons require a margin of `eps`.
    Eps(f64),
}

impl ValueCmp {
    /// `a` strictly exceeds `b`.
    pub fn gt(self, a: f64, b: f64) -> bool {
        match self {
            ValueCmp::Exact => a > b,
            ValueCmp::Eps(eps) => a > b + eps,
        }
    }

    pub fn ge(self, a: f64, b: f64) -> bool {
        !self.gt(b, a)
    }

    pub fn eq(self, a: f64, b: f64) -> bool {
        !self.gt(a, b) && !self.gt(b, a)
    }

    pub fn cmp(self, a: f64, b: f64) -> Ordering {
        if self.gt(a, b) {
            Ordering::Greater
        } else if self.gt(b, a) {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// Lexicographic comparison of equal-length slices.
    pub fn lex_cmp(self, a: &[f64], b: &[f64]) -> Ordering {
        debug_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            match self.cmp(*x, *y) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }
}

/// Enumeration budgets and tolerances shared by the checkers and solvers.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Maximum number of candidate coalitions a brute-force scan may visit.
    pub subset_budget: u64,
    /// Maximum agent count for exhaustive partition enumeration.
    pub partition_limit: usize,
    /// Absolute tolerance for real-valued instances.
    pub epsilon: f64,
    /// Safety cap on dynamics steps when no a-priori move bound exists.
    pub step_cap: u64,
    /// Worker threads for the heavy blocking-coalition scans (1 = sequential).
    pub threads: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            subset_budget: 10_000_000,
            partition_limit: 8,
            epsilon: DEFAULT_EPSILON,
            step_cap: 1_000_000,
            threads: 1,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> crate::error::Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1e-3) {
            return Err(crate::error::Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1e-3], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}
