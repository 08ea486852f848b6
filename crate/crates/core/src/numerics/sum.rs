//! Alternating sums with a running error bound.

use super::dd::{self, Dd};

/// Accumulates signed terms in double-double and tracks how much of the
/// working precision the cancellation has eaten.
#[derive(Clone, Debug, Default)]
pub struct SignedTermSum {
    terms: Vec<(i8, f64)>,
    acc: Dd,
    magnitude: f64,
    abs_error: f64,
}

/// Outcome of a [`SignedTermSum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumEstimate {
    pub value: f64,
    pub relative_error: f64,
    /// Set when `relative_error` exceeds the requested tolerance.
    pub precision_loss: bool,
}

impl SignedTermSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `sign · exp(log_magnitude)`.
    pub fn push_log(&mut self, sign: i8, log_magnitude: f64) {
        let mag = Dd::from_f64(log_magnitude).exp();
        // The log itself carries half an ulp of error, which exp() amplifies.
        let rel = log_magnitude.abs() * f64::EPSILON * 0.5 + 8.0 * dd::EPS;
        let term = if sign < 0 { -mag } else { mag };
        self.terms.push((sign.signum(), log_magnitude));
        self.accumulate(term, rel);
    }

    /// Adds a double-double term whose own relative error is `rel_error`.
    pub(crate) fn push_dd(&mut self, term: Dd, rel_error: f64) {
        let sign = if term.hi < 0.0 { -1 } else { 1 };
        let log_mag = if term.hi == 0.0 {
            f64::NEG_INFINITY
        } else {
            term.abs().to_f64().ln()
        };
        self.terms.push((sign, log_mag));
        self.accumulate(term, rel_error);
    }

    fn accumulate(&mut self, term: Dd, rel: f64) {
        let m = term.hi.abs();
        self.acc += term;
        self.magnitude += m;
        self.abs_error += m * (rel + 2.0 * dd::EPS);
    }

    pub fn terms(&self) -> &[(i8, f64)] {
        &self.terms
    }

    pub(crate) fn value_dd(&self) -> Dd {
        self.acc
    }

    pub fn value(&self) -> f64 {
        self.acc.to_f64()
    }

    /// `Σ|t| / |Σt|`.
    pub fn condition(&self) -> f64 {
        let v = self.acc.hi.abs();
        if v == 0.0 {
            f64::INFINITY
        } else {
            self.magnitude / v
        }
    }

    pub fn relative_error(&self) -> f64 {
        // Rounding the double-double to f64 adds half an ulp.
        self.relative_error_dd() + f64::EPSILON * 0.5
    }

    /// Error bound of the double-double accumulator itself.
    pub(crate) fn relative_error_dd(&self) -> f64 {
        let v = self.acc.hi.abs();
        if v == 0.0 {
            if self.abs_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_error / v
        }
    }

    pub fn finish(&self, tol: f64) -> SumEstimate {
        let relative_error = self.relative_error();
        SumEstimate {
            value: self.value(),
            relative_error,
            precision_loss: !(relative_error <= tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_tracked() {
        let mut s = SignedTermSum::new();
        s.push_log(1, 40.0);
        s.push_log(-1, 40.0);
        s.push_log(1, 0.0);
        let est = s.finish(1e-8);
        // e^40 - e^40 + 1 with each e^40 known to ~40·2^-53 relative.
        assert!(est.precision_loss);
        assert!(s.condition() > 1e17);
    }

    #[test]
    fn benign_sum_is_exact_enough() {
        let mut s = SignedTermSum::new();
        for k in 1..=10 {
            s.push_log(if k % 2 == 0 { -1 } else { 1 }, -(k as f64));
        }
        let want: f64 = (1..=10)
            .map(|k| if k % 2 == 0 { -(-(k as f64)).exp() } else { (-(k as f64)).exp() })
            .sum();
        let est = s.finish(1e-12);
        assert!(!est.precision_loss);
        assert!(((est.value - want) / want).abs() < 1e-14);
        assert_eq!(s.terms().len(), 10);
    }
}
