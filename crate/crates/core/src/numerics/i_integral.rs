//! `I(α, β) = ∫₀^∞ e^{-αx} / (1+x)^β dx`.
//!
//! The primary route is the finite recursion
//!
//! ```text
//! I(α,1) = e^α E1(α)
//! I(α,β) = (-1)^{β-1} α^{β-1} e^α E1(α) / (β-1)!
//!          + Σ_{i=1}^{β-1} (i-1)!/(β-1)! · (-α)^{β-i-1}
//! ```
//!
//! summed in double-double. Its terms alternate and grow like `e^α`, so for
//! large `α` relative to `β` the sum loses everything. When the running error
//! bound exceeds the tolerance the result is flagged and recomputed from the
//! continued fraction for `e^α E_β(α)`, with quadrature as the last resort.

use super::dd::{self, Dd};
use super::expint::{scaled_e1_dd, scaled_en_cf};
use super::quadrature::{integrate_semi_infinite, Quadrature, QuadratureSpec};
use super::sum::{SignedTermSum, SumEstimate};
use crate::error::{domain, Result};

/// Relative error above which the recursion is considered to have failed.
pub const DEFAULT_PRECISION_TOL: f64 = 1e-8;

// The E1 evaluations feeding the recursion are good to a few hundred units of
// double-double roundoff.
const E1_REL_ERROR: f64 = 1e3 * dd::EPS;
const CF_REL_ERROR: f64 = 1e4 * dd::EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IRoute {
    /// The alternating recursion in extended precision.
    Recursion,
    /// Continued fraction for `e^α E_β(α)`.
    ContinuedFraction,
    /// Adaptive quadrature of the defining integral.
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IIntegral {
    pub value: f64,
    /// Error bound for the reported value.
    pub relative_error: f64,
    /// Estimated relative error of the recursion itself.
    pub recursion_error: f64,
    /// The recursion missed the tolerance and a fallback produced `value`.
    pub precision_loss: bool,
    pub route: IRoute,
}

fn check(alpha: f64, beta: u32) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain(format!("I(α,β) requires α > 0, got {alpha}")));
    }
    if beta < 1 {
        return Err(domain("I(α,β) requires β >= 1"));
    }
    Ok(())
}

/// The recursion alone, with its error estimate. No fallback.
pub fn i_integral_recursion(alpha: f64, beta: u32) -> Result<SumEstimate> {
    check(alpha, beta)?;
    Ok(recursion(Dd::from_f64(alpha), beta).finish(DEFAULT_PRECISION_TOL))
}

fn recursion(alpha: Dd, beta: u32) -> SignedTermSum {
    let mut sum = SignedTermSum::new();
    let e = scaled_e1_dd(alpha);
    if beta == 1 {
        sum.push_dd(e, E1_REL_ERROR);
        return sum;
    }
    let b1 = (beta - 1) as f64;
    let mut t = Dd::ONE.div_f64(b1);
    sum.push_dd(t, 2.0 * dd::EPS);
    for j in 1..=(beta - 2) {
        t = (t * -alpha).div_f64((beta - 1 - j) as f64);
        sum.push_dd(t, (2.0 + 3.0 * j as f64) * dd::EPS);
    }
    let last = (t * -alpha) * e;
    sum.push_dd(last, E1_REL_ERROR + 3.0 * beta as f64 * dd::EPS);
    sum
}

/// `I(α, β)` with the default tolerance.
pub fn i_integral(alpha: f64, beta: u32) -> Result<IIntegral> {
    i_integral_tol(alpha, beta, DEFAULT_PRECISION_TOL)
}

pub fn i_integral_tol(alpha: f64, beta: u32, tol: f64) -> Result<IIntegral> {
    check(alpha, beta)?;
    let (v, r) = i_integral_dd(Dd::from_f64(alpha), beta, tol)?;
    Ok(IIntegral {
        value: v.to_f64(),
        relative_error: r.relative_error.max(f64::EPSILON * 0.5),
        ..r
    })
}

/// Double-double value plus provenance, used by the `J` closed form. Taking
/// `α` in double-double matters there: the outer sum amplifies any rounding
/// of `α` itself.
pub(crate) fn i_integral_dd(alpha: Dd, beta: u32, tol: f64) -> Result<(Dd, IIntegral)> {
    check(alpha.to_f64(), beta)?;
    let sum = recursion(alpha, beta);
    let rec_err = sum.relative_error_dd();
    let value = sum.value_dd();
    if rec_err <= tol && value.hi > 0.0 {
        return Ok((
            value,
            IIntegral {
                value: value.to_f64(),
                relative_error: rec_err,
                recursion_error: rec_err,
                precision_loss: false,
                route: IRoute::Recursion,
            },
        ));
    }
    if let Some(h) = scaled_en_cf(alpha, beta) {
        return Ok((
            h,
            IIntegral {
                value: h.to_f64(),
                relative_error: CF_REL_ERROR,
                recursion_error: rec_err,
                precision_loss: true,
                route: IRoute::ContinuedFraction,
            },
        ));
    }
    let q = i_integral_quadrature(alpha.to_f64(), beta, &QuadratureSpec::default())?;
    Ok((
        Dd::from_f64(q.value),
        IIntegral {
            value: q.value,
            relative_error: q.abs_error / q.value,
            recursion_error: rec_err,
            precision_loss: true,
            route: IRoute::Quadrature,
        },
    ))
}

/// Direct quadrature of the defining integral.
pub fn i_integral_quadrature(alpha: f64, beta: u32, spec: &QuadratureSpec) -> Result<Quadrature> {
    check(alpha, beta)?;
    let scale = 1.0 / (alpha + beta as f64);
    let spec = spec.with_split(scale.min(1.0));
    let b = beta as f64;
    integrate_semi_infinite(move |x| (-alpha * x - b * x.ln_1p()).exp(), &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_one_is_scaled_e1() {
        let v = i_integral(1.0, 1).unwrap();
        assert_eq!(v.route, IRoute::Recursion);
        assert_relative_eq!(v.value, 0.5963473623231941, max_relative = 1e-15);
    }

    #[test]
    fn beta_two() {
        let v = i_integral(1.0, 2).unwrap();
        assert_relative_eq!(v.value, 0.4036526376768059, max_relative = 1e-14);
    }

    #[test]
    fn moderate_case_matches_reference() {
        // mpmath: e^0.4 E_13(0.4)
        let v = i_integral(0.4, 13).unwrap();
        assert_eq!(v.route, IRoute::Recursion);
        assert_relative_eq!(v.value, 0.08041911013843538, max_relative = 1e-13);
    }

    #[test]
    fn hard_case_flags_and_recovers() {
        let v = i_integral(50.0, 51).unwrap();
        assert!(v.precision_loss);
        assert_ne!(v.route, IRoute::Recursion);
        assert_relative_eq!(v.value, 0.00995025117022831, max_relative = 1e-13);
    }

    #[test]
    fn quadrature_route_agrees() {
        let q = i_integral_quadrature(0.4, 13, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(q.value, 0.08041911013843538, max_relative = 1e-11);
    }

    #[test]
    fn domain_errors() {
        assert!(i_integral(0.0, 1).is_err());
        assert!(i_integral(1.0, 0).is_err());
    }
}
