//! Closed-form SINR laws.
//!
//! * `Z`: SINR on one beam, `g₁/(M/ρ + Σ_{i>1} g_i)` with `g_i` i.i.d. Exp(1).
//! * `Y`: the best of the `M` (dependent) beam SINRs.
//! * `W`: the SINR seen for one of the user's best `L` out of `N` resource
//!   blocks, i.e. a uniformly chosen member of the top-`L` order statistics
//!   of `N` i.i.d. copies of `Y`.
//!
//! Survival functions are computed directly rather than as `1 − cdf` so the
//! upper tail keeps full relative accuracy; extreme-value work lives there.

use serde::{Deserialize, Serialize};

use super::coefficients::{self, to_f64};
use crate::error::{domain, Result};
use crate::numerics::dd::Dd;
use crate::numerics::one_minus_pow_complement;

/// Per-user channel parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserChannelProfile {
    /// Transmit antennas, equal to the number of beams.
    pub m: u32,
    /// Average received SNR, linear.
    pub rho: f64,
    /// Resource blocks (1 for narrowband).
    pub n: u32,
    /// Spectral feedback depth.
    pub l: u32,
}

impl UserChannelProfile {
    pub fn new(m: u32, rho: f64, n: u32, l: u32) -> Result<Self> {
        let p = UserChannelProfile { m, rho, n, l };
        p.validate()?;
        Ok(p)
    }

    pub fn narrowband(m: u32, rho: f64) -> Result<Self> {
        Self::new(m, rho, 1, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(domain("M must be at least 1"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(domain(format!("rho must be positive and finite, got {}", self.rho)));
        }
        if self.n < 1 || self.l < 1 || self.l > self.n {
            return Err(domain(format!(
                "need 1 <= L <= N, got N={}, L={}",
                self.n, self.l
            )));
        }
        Ok(())
    }

    pub fn with_rho(self, rho: f64) -> Self {
        UserChannelProfile { rho, ..self }
    }

    pub fn with_depth(self, n: u32, l: u32) -> Self {
        UserChannelProfile { n, l, ..self }
    }
}

/// `ρ_linear = 10^{dB/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn mf(p: &UserChannelProfile) -> f64 {
    p.m as f64
}

/// `1 − F_Z(x) = e^{−Mx/ρ} (1+x)^{−(M−1)}`.
pub fn sf_z(x: f64, p: &UserChannelProfile) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let m = mf(p);
    (-m * x / p.rho - (m - 1.0) * x.ln_1p()).exp()
}

pub fn cdf_z(x: f64, p: &UserChannelProfile) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let m = mf(p);
    -(-m * x / p.rho - (m - 1.0) * x.ln_1p()).exp_m1()
}

/// `f_Z(x) = e^{−Mx/ρ} (1+x)^{−M} (M(1+x)/ρ + M − 1)`.
pub fn pdf_z(x: f64, p: &UserChannelProfile) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let m = mf(p);
    (-m * x / p.rho - m * x.ln_1p()).exp() * (m * (1.0 + x) / p.rho + m - 1.0)
}

// Terms of the best-beam law: 1 − F_Y = Σ_ι T_ι with
// T_ι = d_ι^M e^{−2Mx/(ρ d_ι)} / A_ι, d_ι = 2(1 − (M−ι)x)/(M−ι+1),
// A_ι = d_ι Π_{i≠ι} (d_ι − d_i). Terms with d_ι ≤ 0 vanish.
const D_GUARD: f64 = 1e-300;

fn d_iota(iota: u32, m: u32, x: f64) -> f64 {
    let k = (m - iota) as f64;
    2.0 * (1.0 - k * x) / (k + 1.0)
}

fn d_prime(iota: u32, m: u32) -> f64 {
    let k = (m - iota) as f64;
    -2.0 * k / (k + 1.0)
}

/// `(T_ι, d ln T_ι/dx)` for each live term.
fn y_terms(x: f64, p: &UserChannelProfile) -> Vec<(f64, f64)> {
    let m = p.m;
    let mf = m as f64;
    let d: Vec<f64> = (1..=m).map(|i| d_iota(i, m, x)).collect();
    let dp: Vec<f64> = (1..=m).map(|i| d_prime(i, m)).collect();
    let mut out = Vec::with_capacity(m as usize);
    for j in 0..m as usize {
        let dj = d[j];
        if dj <= D_GUARD {
            continue;
        }
        let mut log_a = dj.ln();
        let mut sign = 1.0;
        let mut dlog_prod = 0.0;
        for i in 0..m as usize {
            if i == j {
                continue;
            }
            let diff = dj - d[i];
            if diff < 0.0 {
                sign = -sign;
            }
            log_a += diff.abs().ln();
            dlog_prod += (dp[j] - dp[i]) / diff;
        }
        let log_t = mf * dj.ln() - 2.0 * mf * x / (p.rho * dj) - log_a;
        let t = sign * log_t.exp();
        let dlog = (mf - 1.0) * dp[j] / dj
            - (2.0 * mf / p.rho) * (dj - x * dp[j]) / (dj * dj)
            - dlog_prod;
        out.push((t, dlog));
    }
    out
}

/// Best-beam survival `1 − F_Y(x)`.
///
/// Beyond `x = 1` only the `ι = M` term survives and it reduces to
/// `M·(1 − F_Z(x))`, which is used directly.
pub fn sf_y(x: f64, p: &UserChannelProfile) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if p.m == 1 || x >= 1.0 {
        return (mf(p) * sf_z(x, p)).min(1.0);
    }
    let s: f64 = y_terms(x, p).iter().map(|t| t.0).sum();
    s.clamp(0.0, 1.0)
}

pub fn cdf_y(x: f64, p: &UserChannelProfile) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if p.m == 1 {
        return cdf_z(x, p);
    }
    if x >= 1.0 {
        return 1.0 - sf_y(x, p);
    }
    let s: f64 = y_terms(x, p).iter().map(|t| t.0).sum();
    let c = 1.0 - s;
    if c < SMALL_CDF {
        return cdf_y_dd(x, p);
    }
    c.min(1.0)
}

// Below this the f64 sum `1 − Σ T_ι` is dominated by cancellation.
const SMALL_CDF: f64 = 1e-6;

/// `1 − Σ T_ι` in double-double. Near the origin `F_Y` is of order `x^M`
/// while the terms are of order one, so the f64 sum only resolves it to
/// about 1e-15 absolute. Differences of the `d_ι` use the factored form
/// `2(j − i)(1 + x)/((k_j + 1)(k_i + 1))`, which is exact up to rounding.
fn cdf_y_dd(x: f64, p: &UserChannelProfile) -> f64 {
    let m = p.m;
    let xd = Dd::from_f64(x);
    let kf = |i: u32| (m - i) as f64;
    let d: Vec<Dd> = (1..=m)
        .map(|i| (Dd::ONE - xd.mul_f64(kf(i))).mul_f64(2.0).div_f64(kf(i) + 1.0))
        .collect();
    let mut acc = Dd::ONE;
    for j in 1..=m {
        let dj = d[j as usize - 1];
        if dj.to_f64() <= D_GUARD {
            continue;
        }
        let ln_d = dj.ln();
        let mut log_a = ln_d;
        let mut negative = false;
        for i in (1..=m).filter(|&i| i != j) {
            let gap = (Dd::ONE + xd)
                .mul_f64(2.0 * (j as f64 - i as f64).abs())
                .div_f64((kf(j) + 1.0) * (kf(i) + 1.0));
            negative ^= i > j;
            log_a += gap.ln();
        }
        let log_t = ln_d.mul_f64(m as f64) - xd.mul_f64(2.0 * m as f64) / dj.mul_f64(p.rho) - log_a;
        let t = log_t.exp();
        if negative {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc.to_f64().clamp(0.0, 1.0)
}

pub fn pdf_y(x: f64, p: &UserChannelProfile) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if p.m == 1 || x >= 1.0 {
        return mf(p) * pdf_z(x, p);
    }
    let s: f64 = y_terms(x, p).iter().map(|(t, dl)| -t * dl).sum();
    s.max(0.0)
}

/// Independence approximation `F_Z(x)^M` of the best-beam law.
pub fn cdf_y_approx(x: f64, p: &UserChannelProfile) -> f64 {
    cdf_z(x, p).powi(p.m as i32)
}

/// Which law a [`SinrLaw`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawKind {
    /// `F_Z`.
    PerBeamZ,
    /// `F_Y`.
    BestBeamY,
    /// `F_Z^M`.
    BestBeamApprox,
    /// `F_W = Σ ξ₁ F_Y^{N−ℓ}`.
    BestLW,
    /// `Σ ξ₁ (F_Z^M)^{N−ℓ}`, the best-L law built on the approximation.
    BestLWApprox,
    /// `F_Y^η` with `η = N − Σ ξ₁ ℓ`.
    TailEquivalentW,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::PerBeamZ => "per_beam_z",
            LawKind::BestBeamY => "best_beam_y",
            LawKind::BestBeamApprox => "best_beam_approx",
            LawKind::BestLW => "best_l_w",
            LawKind::BestLWApprox => "best_l_w_approx",
            LawKind::TailEquivalentW => "tail_equivalent_w",
        }
    }
}

/// An immutable SINR distribution with CDF, survival, density and inverses.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrLaw {
    kind: LawKind,
    profile: UserChannelProfile,
    // (ξ₁(ℓ), N − ℓ)
    mix: Vec<(f64, f64)>,
    eta: f64,
}

impl SinrLaw {
    pub fn new(kind: LawKind, profile: UserChannelProfile) -> Result<Self> {
        profile.validate()?;
        let row = coefficients::xi1_row(profile.n, profile.l)?;
        let n = profile.n as f64;
        let mix = row
            .iter()
            .enumerate()
            .map(|(ell, x)| (to_f64(x), n - ell as f64))
            .collect();
        let eta = to_f64(&coefficients::tail_equivalent_exponent_exact(profile.n, profile.l)?);
        Ok(SinrLaw {
            kind,
            profile,
            mix,
            eta,
        })
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn profile(&self) -> &UserChannelProfile {
        &self.profile
    }

    /// Tail exponent `η` of the best-L law.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let p = &self.profile;
        let m = p.m as f64;
        let v = match self.kind {
            LawKind::PerBeamZ => cdf_z(x, p),
            LawKind::BestBeamY => cdf_y(x, p),
            LawKind::BestBeamApprox => cdf_y_approx(x, p),
            // The ξ₁ mix has mixed signs; near one its rounding shows, while
            // the survival mix stays accurate and monotone.
            LawKind::BestLW | LawKind::BestLWApprox if self.sf(x) < 0.5 => 1.0 - self.sf(x),
            LawKind::BestLW => {
                let f = cdf_y(x, p);
                self.mix.iter().map(|&(c, e)| c * f.powf(e)).sum()
            }
            LawKind::BestLWApprox => {
                let f = cdf_z(x, p);
                self.mix.iter().map(|&(c, e)| c * f.powf(m * e)).sum()
            }
            LawKind::TailEquivalentW => cdf_y(x, p).powf(self.eta),
        };
        v.clamp(0.0, 1.0)
    }

    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let p = &self.profile;
        let m = p.m as f64;
        let v = match self.kind {
            LawKind::PerBeamZ => sf_z(x, p),
            LawKind::BestBeamY => sf_y(x, p),
            LawKind::BestBeamApprox => one_minus_pow_complement(sf_z(x, p), m),
            LawKind::BestLW => {
                let s = sf_y(x, p);
                self.mix
                    .iter()
                    .map(|&(c, e)| c * one_minus_pow_complement(s, e))
                    .sum()
            }
            LawKind::BestLWApprox => {
                let s = sf_z(x, p);
                self.mix
                    .iter()
                    .map(|&(c, e)| c * one_minus_pow_complement(s, m * e))
                    .sum()
            }
            LawKind::TailEquivalentW => one_minus_pow_complement(sf_y(x, p), self.eta),
        };
        v.clamp(0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let p = &self.profile;
        let m = p.m as f64;
        let v = match self.kind {
            LawKind::PerBeamZ => pdf_z(x, p),
            LawKind::BestBeamY => pdf_y(x, p),
            LawKind::BestBeamApprox => m * cdf_z(x, p).powf(m - 1.0) * pdf_z(x, p),
            LawKind::BestLW => {
                let f = cdf_y(x, p);
                let d = pdf_y(x, p);
                self.mix
                    .iter()
                    .map(|&(c, e)| c * e * f.powf(e - 1.0) * d)
                    .sum()
            }
            LawKind::BestLWApprox => {
                let f = cdf_z(x, p);
                let d = pdf_z(x, p);
                self.mix
                    .iter()
                    .map(|&(c, e)| c * m * e * f.powf(m * e - 1.0) * d)
                    .sum()
            }
            LawKind::TailEquivalentW => {
                self.eta * cdf_y(x, p).powf(self.eta - 1.0) * pdf_y(x, p)
            }
        };
        v.max(0.0)
    }

    /// Smallest `x` with `cdf(x) >= prob`, to 1e-10 in probability.
    pub fn inverse_cdf(&self, prob: f64) -> f64 {
        if !(prob > 0.0) {
            return 0.0;
        }
        if prob >= 1.0 {
            return f64::INFINITY;
        }
        if prob > 0.5 {
            return self.inverse_sf(1.0 - prob);
        }
        self.bisect(|x| self.cdf(x) >= prob)
    }

    /// `x` with `sf(x) = q`, bisected on the survival function so tail
    /// quantiles keep relative accuracy.
    pub fn inverse_sf(&self, q: f64) -> f64 {
        if !(q < 1.0) {
            return 0.0;
        }
        if q <= 0.0 {
            return f64::INFINITY;
        }
        self.bisect(|x| self.sf(x) <= q)
    }

    fn bisect<P: Fn(f64) -> bool>(&self, reached: P) -> f64 {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while !reached(hi) {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if reached(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}
