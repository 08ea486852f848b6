//! Binomial coefficients and binomial masses.

use statrs::function::gamma::ln_gamma;

use super::dd::Dd;
use crate::error::{domain, Result};

/// Exact `C(n, k)` when it fits in a `u128` without intermediate overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c·(n−i) is divisible by (i+1) after the multiplication.
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

/// Natural log of `C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(domain(format!("log_binomial needs k <= n, got n={n}, k={k}")));
    }
    if let Some(c) = binomial_exact(n, k) {
        return Ok(Dd::from_u128(c).ln().to_f64());
    }
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

/// `C(n, k)` as a double-double, exact whenever the value fits in 106 bits.
pub(crate) fn binomial_dd(n: u64, k: u64) -> Option<Dd> {
    binomial_exact(n, k).map(Dd::from_u128)
}

/// Binomial(n, p) probability mass at `k`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n || !(0.0..=1.0).contains(&p) {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let lb = log_binomial(n, k).expect("k <= n checked above");
    (lb + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}
