//! Exponential integrals.
//!
//! `E1` uses the power series below 1 and a continued fraction above. The
//! working precision is double-double so that the `f64` result is correctly
//! rounded in practice and the `Dd` forms can feed the cancellation-prone sums
//! in [`super::i_integral`].

use super::dd::{self, Dd};
use crate::error::{domain, Result};

const CF_MAX_ITER: usize = 20_000;

/// Exponential integral `E1(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        return Err(domain(format!("E1 requires x > 0, got {x}")));
    }
    let xd = Dd::from_f64(x);
    if x < 1.0 {
        Ok(e1_series(xd).to_f64())
    } else {
        let scaled = scaled_en_cf(xd, 1).expect("continued fraction converges for x >= 1");
        Ok(scaled.to_f64() * (-x).exp())
    }
}

/// `e^x E1(x)` in double-double, `x > 0`.
pub(crate) fn scaled_e1_dd(x: Dd) -> Dd {
    debug_assert!(x.hi > 0.0);
    if x.hi < 1.0 {
        x.exp() * e1_series(x)
    } else {
        scaled_en_cf(x, 1).expect("continued fraction converges for x >= 1")
    }
}

/// Series `-γ - ln x + Σ (-1)^{k+1} x^k / (k·k!)`, accurate for `0 < x < ~2`.
fn e1_series(xd: Dd) -> Dd {
    let mut term = Dd::ONE;
    let mut sum = Dd::ZERO;
    for k in 1..200 {
        term = (term * xd).div_f64(k as f64);
        let contrib = term.div_f64(k as f64);
        if k % 2 == 1 {
            sum += contrib;
        } else {
            sum -= contrib;
        }
        if contrib.hi.abs() < dd::EPS * 1e-2 * sum.hi.abs() {
            break;
        }
    }
    sum - Dd::GAMMA - xd.ln()
}

/// `e^x E_n(x)` by the modified Lentz continued fraction
/// `1/(x+n - 1·n/(x+n+2 - 2(n+1)/(x+n+4 - ...)))`.
///
/// Returns `None` when the fraction has not settled within the iteration
/// budget, which only happens for small `x` combined with small `n`.
pub(crate) fn scaled_en_cf(x: Dd, n: u32) -> Option<Dd> {
    let tiny = 1e-300;
    let mut b = x + Dd::from_f64(n as f64);
    let mut c = Dd::from_f64(1.0 / tiny);
    let mut d = b.recip();
    let mut h = d;
    for i in 1..=CF_MAX_ITER {
        let an = Dd::from_f64(-(i as f64) * ((n as f64) - 1.0 + i as f64));
        b += Dd::from_f64(2.0);
        let denom = an * d + b;
        d = if denom.hi == 0.0 {
            Dd::from_f64(1.0 / tiny)
        } else {
            denom.recip()
        };
        c = b + an / c;
        if c.hi == 0.0 {
            c = Dd::from_f64(tiny);
        }
        let del = c * d;
        h *= del;
        if (del - Dd::ONE).hi.abs() < 4.0 * dd::EPS {
            return Some(h);
        }
    }
    None
}
