//! Special functions, guarded sums and quadrature.

pub(crate) mod dd;
mod binomial;
mod expint;
mod i_integral;
mod quadrature;
mod sum;

pub use binomial::{binomial_exact, binomial_pmf, log_binomial};
pub(crate) use binomial::binomial_dd;
pub use expint::exp_integral_e1;
pub(crate) use i_integral::i_integral_dd;
pub use i_integral::{
    i_integral, i_integral_quadrature, i_integral_recursion, i_integral_tol, IIntegral, IRoute,
    DEFAULT_PRECISION_TOL,
};
pub use quadrature::{integrate_interval, integrate_semi_infinite, Quadrature, QuadratureSpec};
pub use sum::{SignedTermSum, SumEstimate};

/// `1 - (1 - s)^n` without cancellation when `s` is small.
#[inline]
pub fn one_minus_pow_complement(s: f64, n: f64) -> f64 {
    if s >= 1.0 {
        return 1.0;
    }
    if s <= 0.0 {
        return 0.0;
    }
    -(n * (-s).ln_1p()).exp_m1()
}
