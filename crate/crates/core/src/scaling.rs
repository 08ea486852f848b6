//! Extreme-value machinery: normalizing constants, Gumbel diagnostics,
//! random-sample-size extremes and the log-log scaling ratios.
//!
//! Three location conventions are available. [`Convention::PrintedLog2`] is
//! the asymptotic formula with base-2 logarithms and scale `ρ`;
//! [`Convention::NaturalLog`] is the same formula in natural logs. Both drop
//! the `o(1)` terms and are far from the actual quantiles at practical `K`.
//! [`Convention::TailQuantile`] uses the exact `1 − 1/n` quantile of the base
//! law and the growth function there, which is the normalization that the
//! limit theorems are built on before any asymptotic simplification.

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::config::FeedbackScheme;
use crate::distributions::{
    rational_to_f64, tail_equivalent_exponent_exact, LawKind, SinrLaw,
    UserChannelProfile,
};
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_interval, QuadratureSpec};
use crate::rates::{RateEngine, RateOptions, RateResult};
use crate::stats::ks_statistic;

/// `g(x) = (1 − F_Z(x)) / f_Z(x)`.
///
/// For `M = 1` this is `ρ` everywhere; otherwise it rises from
/// `1/(M/ρ + M − 1)` at zero to `ρ/M` as `x → ∞`.
pub fn growth_function(x: f64, p: &UserChannelProfile) -> f64 {
    let x = x.max(0.0);
    if p.m == 1 {
        return p.rho;
    }
    // Closed form of the ratio, free of the underflow in sf and pdf.
    let m = p.m as f64;
    (1.0 + x) / (m * (1.0 + x) / p.rho + m - 1.0)
}

/// Ratio form of [`growth_function`] for an arbitrary law.
pub fn growth_function_of(law: &SinrLaw, x: f64) -> f64 {
    law.sf(x) / law.pdf(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    PrintedLog2,
    NaturalLog,
    TailQuantile,
}

impl Convention {
    pub const ALL: [Convention; 3] = [
        Convention::PrintedLog2,
        Convention::NaturalLog,
        Convention::TailQuantile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Convention::PrintedLog2 => "printed_log2",
            Convention::NaturalLog => "natural_log",
            Convention::TailQuantile => "tail_quantile",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizingConstants {
    pub location: f64,
    pub scale: f64,
    pub scheme: FeedbackScheme,
    pub k: u32,
    pub profile: UserChannelProfile,
    pub convention: Convention,
}

impl NormalizingConstants {
    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }
}

/// Number of values the scheduler maximizes over per beam, exactly:
/// `K`, `K/M` or `K·L·η/(M·N)`.
pub fn virtual_users_exact(scheme: FeedbackScheme, k: u32, p: &UserChannelProfile) -> Result<BigRational> {
    let kk = BigRational::from_integer(BigInt::from(k));
    let m = BigRational::from_integer(BigInt::from(p.m));
    Ok(match scheme {
        FeedbackScheme::FullFeedback => kk,
        FeedbackScheme::SpatialSelective => kk / m,
        FeedbackScheme::BestL => {
            let eta = tail_equivalent_exponent_exact(p.n, p.l)?;
            let l = BigRational::from_integer(BigInt::from(p.l));
            let n = BigRational::from_integer(BigInt::from(p.n));
            kk * l * eta / (m * n)
        }
    })
}

pub fn virtual_users(scheme: FeedbackScheme, k: u32, p: &UserChannelProfile) -> Result<f64> {
    Ok(rational_to_f64(&virtual_users_exact(scheme, k, p)?))
}

/// The law whose maximum the scheduler takes on each beam.
pub fn base_law(scheme: FeedbackScheme, p: &UserChannelProfile) -> Result<SinrLaw> {
    let kind = match scheme {
        FeedbackScheme::FullFeedback => LawKind::PerBeamZ,
        FeedbackScheme::SpatialSelective => LawKind::BestBeamY,
        FeedbackScheme::BestL => LawKind::BestLW,
    };
    SinrLaw::new(kind, *p)
}

/// Printed constants (base-2 logs, scale `ρ`).
pub fn normalizing_constants(scheme: FeedbackScheme, k: u32, p: &UserChannelProfile) -> Result<NormalizingConstants> {
    normalizing_constants_with(scheme, k, p, Convention::PrintedLog2)
}

pub fn normalizing_constants_with(
    scheme: FeedbackScheme,
    k: u32,
    p: &UserChannelProfile,
    convention: Convention,
) -> Result<NormalizingConstants> {
    if k < 3 {
        return Err(domain(format!("normalizing constants need K >= 3, got {k}")));
    }
    p.validate()?;
    let rho = p.rho;
    let m = p.m as f64;
    let kf = k as f64;
    let nv = virtual_users(scheme, k, p)?;
    let (location, scale) = match convention {
        Convention::PrintedLog2 => (
            rho * nv.log2() - rho * (m - 1.0) * kf.log2().log2(),
            rho,
        ),
        Convention::NaturalLog => (
            rho * nv.ln() - rho * (m - 1.0) * kf.ln().ln(),
            rho,
        ),
        Convention::TailQuantile => {
            // Counted against the scheme's own law, so best-L uses the
            // expected number of reporters K·L/(M·N), not the F_Y-equivalent
            // count.
            let law = base_law(scheme, p)?;
            let reporters = kf * scheme.report_probability(p.m, p.n, p.l);
            if !(reporters > 1.0) {
                return Err(domain(format!(
                    "tail-quantile constants need more than one expected reporter, got {reporters}"
                )));
            }
            let a = law.inverse_sf(1.0 / reporters);
            (a, growth_function_of(&law, a))
        }
    };
    Ok(NormalizingConstants {
        location,
        scale,
        scheme,
        k,
        profile: *p,
        convention,
    })
}

/// `Ψ(x) = exp(−exp(−x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Fits `−ln(−ln Ψ(x)^M) = A + B x` by least squares on `xs`. The functional
/// equation `Ψ(x)^M = Ψ(A + Bx)` is solved by `A = −ln M`, `B = 1`.
pub fn gumbel_power_shift(m: u32, xs: &[f64]) -> (f64, f64) {
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let log_psi_m = m as f64 * gumbel_cdf(x).ln();
            -(-log_psi_m).ln()
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// `|Ψ(x)^M − Ψ(x − ln M)|`.
pub fn gumbel_power_residual(m: u32, x: f64) -> f64 {
    (gumbel_cdf(x).powi(m as i32) - gumbel_cdf(x - (m as f64).ln())).abs()
}

/// KS distance between the normalized maxima and `Ψ`.
pub fn gumbel_diagnostic(samples: &[f64], nc: &NormalizingConstants) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut z: Vec<f64> = samples.iter().map(|&s| nc.normalize(s)).collect();
    Ok(ks_statistic(&mut z, gumbel_cdf))
}

/// `F(x)^{K·p}`: the maximum of a random number of draws from `base` whose
/// count concentrates at `K·p`.
pub fn random_sample_extreme_cdf(x: f64, base: &SinrLaw, k: u32, p_success: f64) -> f64 {
    let f = base.cdf(x);
    if f <= 0.0 {
        return if k as f64 * p_success == 0.0 { 1.0 } else { 0.0 };
    }
    (k as f64 * p_success * f.ln()).exp()
}

/// `∫ F(x)^{K y} dP(ϑ ≤ y)` for a reporting fraction `ϑ` with density
/// `theta_pdf` supported on `[lo, hi] ⊂ [0, 1]`.
pub fn random_sample_extreme_cdf_mixed<D: Fn(f64) -> f64>(
    x: f64,
    base: &SinrLaw,
    k: u32,
    theta_pdf: D,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(domain(format!("ϑ support [{lo}, {hi}] not inside [0, 1]")));
    }
    let lf = base.cdf(x).ln();
    let kf = k as f64;
    let spec = QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    let q = integrate_interval(|y| (kf * y * lf).exp() * theta_pdf(y), lo, hi, &spec)?;
    Ok(q.value)
}

/// Denominator variables of the log-log scaling laws.
pub fn effective_users(scheme: FeedbackScheme, approx: bool, k: u32, p: &UserChannelProfile) -> Result<f64> {
    let kf = k as f64;
    Ok(match (scheme, approx) {
        (FeedbackScheme::FullFeedback, _) => kf,
        (FeedbackScheme::SpatialSelective, false) => kf / p.m as f64,
        (FeedbackScheme::SpatialSelective, true) => kf,
        (FeedbackScheme::BestL, false) => virtual_users(scheme, k, p)?,
        (FeedbackScheme::BestL, true) => {
            let eta = rational_to_f64(&tail_equivalent_exponent_exact(p.n, p.l)?);
            eta * p.l as f64 * kf / p.n as f64
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub scheme: FeedbackScheme,
    pub approx: bool,
    pub profile: UserChannelProfile,
    pub k_grid: Vec<u32>,
    pub effective_k: Vec<f64>,
    pub rate: Vec<f64>,
    /// `R̂ / (M log₂ log₂ K_eff)`.
    pub ratio: Vec<f64>,
    pub ks_distance: Option<Vec<f64>>,
}

impl ScalingReport {
    /// `|ratio − 1|` strictly decreasing along the grid.
    pub fn moves_toward_one(&self) -> bool {
        self.ratio
            .windows(2)
            .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs())
    }

    pub fn ks_strictly_decreasing(&self) -> Option<bool> {
        self.ks_distance
            .as_ref()
            .map(|d| d.windows(2).all(|w| w[1] < w[0]))
    }

    pub fn with_ks(mut self, ks: Vec<f64>) -> Result<Self> {
        if ks.len() != self.k_grid.len() {
            return Err(domain("one KS distance per grid point required"));
        }
        if let Some(d) = ks.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(domain(format!("KS distance {d} outside [0, 1]")));
        }
        self.ks_distance = Some(ks);
        Ok(self)
    }
}

pub fn scaling_ratio_report(
    scheme: FeedbackScheme,
    approx: bool,
    k_grid: &[u32],
    p: &UserChannelProfile,
    rates: &[RateResult],
) -> Result<ScalingReport> {
    if k_grid.is_empty() || k_grid.len() != rates.len() {
        return Err(domain("need one rate per grid point"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("K grid must be strictly ascending"));
    }
    if k_grid[0] < 3 {
        return Err(domain("K grid must start at 3 or more"));
    }
    let m = p.m as f64;
    let mut effective_k = Vec::with_capacity(k_grid.len());
    let mut ratio = Vec::with_capacity(k_grid.len());
    for (&k, r) in k_grid.iter().zip(rates) {
        let e = effective_users(scheme, approx, k, p)?;
        let ll = e.log2().log2();
        if !(ll > 0.0) {
            return Err(domain(format!(
                "effective user count {e} at K={k} leaves log log non-positive"
            )));
        }
        effective_k.push(e);
        ratio.push(r.value / (m * ll));
    }
    Ok(ScalingReport {
        scheme,
        approx,
        profile: *p,
        k_grid: k_grid.to_vec(),
        effective_k,
        rate: rates.iter().map(|r| r.value).collect(),
        ratio,
        ks_distance: None,
    })
}

/// Computes the rates with a fresh engine and builds the report.
pub fn compute_scaling_report(
    scheme: FeedbackScheme,
    approx: bool,
    k_grid: &[u32],
    p: &UserChannelProfile,
) -> Result<ScalingReport> {
    let mut engine = RateEngine::new(*p, RateOptions::default())?;
    let rates = k_grid
        .iter()
        .map(|&k| engine.individual_sum_rate(scheme, k, approx))
        .collect::<Result<Vec<_>>>()?;
    scaling_ratio_report(scheme, approx, k_grid, p, &rates)
}

/// Whether best-L feedback presents the scheduler with exactly `K/M` values.
pub fn best_l_matches_spatial_users(k: u32, p: &UserChannelProfile) -> Result<bool> {
    let spatial = virtual_users_exact(FeedbackScheme::SpatialSelective, k, p)?;
    Ok(virtual_users_exact(FeedbackScheme::BestL, k, p)? == spatial)
}
