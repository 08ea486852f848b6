//! Analytic SINR laws, the best-L mixing coefficients and feedback counts.

mod coefficients;
mod laws;

pub use coefficients::to_f64 as rational_to_f64;
pub use coefficients::{
    tail_equivalent_exponent, tail_equivalent_exponent_exact, xi1, xi1_abs_sum, xi1_exact,
    xi1_row, xi2, xi2_brute_force, xi2_exact, xi2_row, CoefficientTable, Xi2Row,
};
pub use laws::{
    cdf_y, cdf_y_approx, cdf_z, db_to_linear, linear_to_db, pdf_y, pdf_z, sf_y, sf_z, LawKind,
    SinrLaw, UserChannelProfile,
};

use crate::numerics::binomial_pmf;

/// Probability that exactly `tau` of `k` users report on a given beam when
/// each does so independently with probability `p_success`.
pub fn feedback_count_pmf(tau: u64, k: u64, p_success: f64) -> f64 {
    binomial_pmf(k, tau, p_success)
}

/// Mean and variance of the reporting fraction `κ/K`.
pub fn feedback_fraction_moments(k: u64, p_success: f64) -> (f64, f64) {
    (p_success, p_success * (1.0 - p_success) / k as f64)
}
