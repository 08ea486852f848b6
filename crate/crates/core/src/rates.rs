//! Individual sum rates under CDF-based scheduling.
//!
//! Everything reduces to integrals of the form
//! `J_F(τ) = ∫₀^∞ log₂(1+x) dF(x)^τ = (1/ln 2) ∫₀^∞ (1 − F(x)^τ)/(1+x) dx`
//! for one of the SINR laws, mixed over binomial reporter counts.
//!
//! For `F = F_Z` the integral has a finite closed form in terms of
//! `I(α, β)`; the other laws go through quadrature. The best-L expressions
//! expand `F_W^τ` with the `ξ₂` coefficients. That expansion alternates with
//! total weight up to `(Σ|ξ₁|)^τ`, so when the weight outruns the accuracy of
//! the individual integrals the mixture is evaluated in its collapsed form,
//! one integral against `F_W^τ`, and the result is flagged.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::{FeedbackScheme, SystemConfig};
use crate::distributions::{
    sf_z, xi1_abs_sum, CoefficientTable, LawKind, SinrLaw, UserChannelProfile,
};
use crate::error::{domain, Error, Result};
use crate::numerics::dd::{self, Dd};
use crate::numerics::{
    binomial_dd, binomial_pmf, i_integral_dd, integrate_semi_infinite,
    one_minus_pow_complement, QuadratureSpec, SignedTermSum,
};

/// How a number was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Approximation,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::Approximation => "approximation",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A rate in bits/s/Hz with provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub scheme: FeedbackScheme,
    /// A closed-form or expanded evaluation lost too much precision and a
    /// quadrature-based fallback supplied the value.
    pub precision_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateOptions {
    pub quadrature: QuadratureSpec,
    /// Largest acceptable relative error of a closed-form evaluation.
    pub precision_tol: f64,
    /// Binomial terms with smaller mass are skipped.
    pub prune_threshold: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions {
            quadrature: QuadratureSpec {
                abs_tol: 1e-14,
                rel_tol: 1e-11,
                max_subdivisions: 4000,
                domain_split_point: 1.0,
            },
            precision_tol: 1e-9,
            prune_threshold: 1e-12,
        }
    }
}

/// One term of the decomposition
/// `F_Z(x)^ε = Σ_i c_i (1 − e^{−M(i+1)x/ρ} (1+x)^{−(M−1)(i+1)})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionTerm {
    pub i: u32,
    /// `ε·C(ε−1,i)(−1)^i/(i+1)`.
    pub coefficient: f64,
    /// `M(i+1)/ρ`.
    pub component_rate: f64,
    /// `(M−1)(i+1)`.
    pub component_exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionWeights {
    pub epsilon: u32,
    pub profile: UserChannelProfile,
    pub terms: Vec<DecompositionTerm>,
}

impl DecompositionWeights {
    /// Evaluates the decomposition at `x` in double-double.
    pub fn reconstruct(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s = Dd::from_f64(sf_z(x, &self.profile));
        let mut acc = Dd::ZERO;
        let mut pow = Dd::ONE;
        for t in &self.terms {
            pow *= s;
            let c = coefficient_dd(self.epsilon, t.i);
            acc += c * (Dd::ONE - pow);
        }
        acc.to_f64()
    }
}

// ε·C(ε−1,i)/(i+1) = C(ε, i+1), with the alternating sign.
fn coefficient_dd(eps: u32, i: u32) -> Dd {
    let c = binomial_dd(eps as u64, i as u64 + 1)
        .unwrap_or_else(|| Dd::from_f64(binomial_f64(eps, i + 1)));
    if i % 2 == 0 {
        c
    } else {
        -c
    }
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    crate::numerics::log_binomial(n as u64, k as u64)
        .map(f64::exp)
        .unwrap_or(f64::NAN)
}

pub fn decomposition_weights(epsilon: u32, p: &UserChannelProfile) -> Result<DecompositionWeights> {
    if epsilon < 1 {
        return Err(domain("decomposition needs ε >= 1"));
    }
    p.validate()?;
    let m = p.m as f64;
    let terms = (0..epsilon)
        .map(|i| DecompositionTerm {
            i,
            coefficient: coefficient_dd(epsilon, i).to_f64(),
            component_rate: m * (i as f64 + 1.0) / p.rho,
            component_exponent: (m - 1.0) * (i as f64 + 1.0),
        })
        .collect();
    Ok(DecompositionWeights {
        epsilon,
        profile: *p,
        terms,
    })
}

/// Closed form of `J_Z(ε)` with its estimated relative error, without any
/// fallback. Returns `None` when the binomial weights exceed 106 bits.
pub fn j_k_closed_form(epsilon: u32, p: &UserChannelProfile) -> Result<Option<(f64, f64)>> {
    if epsilon < 1 {
        return Err(domain("J needs ε >= 1"));
    }
    p.validate()?;
    Ok(closed_form_dd(epsilon, p)?.map(|(v, r)| (v.to_f64(), r)))
}

// The outer sum cancels by up to 2^ε, so each I(α,β) has to be good to
// nearly full double-double precision; weaker recursion results are replaced
// by the continued fraction.
const I_TOL_FOR_J: f64 = 1e-26;

fn closed_form_dd(eps: u32, p: &UserChannelProfile) -> Result<Option<(Dd, f64)>> {
    if binomial_dd(eps as u64, (eps / 2) as u64).is_none() {
        return Ok(None);
    }
    let m = p.m as f64;
    let mut sum = SignedTermSum::new();
    for i in 0..eps {
        let alpha = Dd::from_f64(m * (i as f64 + 1.0)).div_f64(p.rho);
        let beta = (p.m - 1) * (i + 1) + 1;
        let (iv, info) = i_integral_dd(alpha, beta, I_TOL_FOR_J)?;
        let c = coefficient_dd(eps, i);
        sum.push_dd(c * iv, info.relative_error + 4.0 * dd::EPS);
    }
    let value = sum.value_dd() / Dd::LN2;
    Ok(Some((value, sum.relative_error_dd())))
}

/// Quadrature of `(1/ln 2) ∫ (1 − F^τ)/(1+x) dx` for a law given by its
/// survival function.
fn log_rate_integral<S: Fn(f64) -> f64>(
    sf: S,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    // Split where F^τ crosses one half, so the transition is resolved on the
    // finite piece.
    let q = -(0.5f64.ln() / tau).exp_m1();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while sf(hi) > q && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let split = hi.max(1e-3);
    let spec = spec.with_split(split);
    let q = integrate_semi_infinite(
        |x| one_minus_pow_complement(sf(x), tau) / (1.0 + x),
        &spec,
    )?;
    let inv = std::f64::consts::LOG2_E;
    Ok((q.value * inv, q.abs_error * inv))
}

/// Quadrature oracle for `J_Z(ε)`.
pub fn j_k_quadrature(epsilon: u32, p: &UserChannelProfile, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if epsilon < 1 {
        return Err(domain("J needs ε >= 1"));
    }
    p.validate()?;
    let p = *p;
    log_rate_integral(move |x| sf_z(x, &p), epsilon as f64, spec)
}

#[derive(Clone, Copy, Debug)]
struct Integral {
    value: f64,
    abs_error: f64,
    fallback: bool,
    method: Method,
}

/// Memoising evaluator for one user profile.
///
/// All rate expressions for a profile share the same handful of integrals,
/// so sweeping `K` through one engine is much cheaper than independent calls.
#[derive(Debug)]
pub struct RateEngine {
    profile: UserChannelProfile,
    opts: RateOptions,
    table: CoefficientTable,
    jz: HashMap<u32, Integral>,
    jy: HashMap<u32, Integral>,
    jw: HashMap<u32, Integral>,
    jw_approx: HashMap<u32, Integral>,
    law_y: SinrLaw,
    law_w: SinrLaw,
    law_w_approx: SinrLaw,
    xi_abs: f64,
}

impl RateEngine {
    pub fn new(profile: UserChannelProfile, opts: RateOptions) -> Result<Self> {
        profile.validate()?;
        Ok(RateEngine {
            profile,
            opts,
            table: CoefficientTable::new(),
            jz: HashMap::new(),
            jy: HashMap::new(),
            jw: HashMap::new(),
            jw_approx: HashMap::new(),
            law_y: SinrLaw::new(LawKind::BestBeamY, profile)?,
            law_w: SinrLaw::new(LawKind::BestLW, profile)?,
            law_w_approx: SinrLaw::new(LawKind::BestLWApprox, profile)?,
            xi_abs: xi1_abs_sum(profile.n, profile.l)?,
        })
    }

    /// Uses a pre-populated coefficient table (e.g. loaded from a cache).
    pub fn with_table(mut self, table: CoefficientTable) -> Self {
        self.table = table;
        self
    }

    pub fn into_table(self) -> CoefficientTable {
        self.table
    }

    pub fn profile(&self) -> &UserChannelProfile {
        &self.profile
    }

    fn jz(&mut self, eps: u32) -> Result<Integral> {
        if let Some(v) = self.jz.get(&eps) {
            return Ok(*v);
        }
        let p = self.profile;
        let closed = closed_form_dd(eps, &p)?;
        let v = match closed {
            Some((v, rel)) if rel <= self.opts.precision_tol => Integral {
                value: v.to_f64(),
                abs_error: (rel * v.to_f64()).abs(),
                fallback: false,
                method: Method::ClosedForm,
            },
            _ => {
                let (value, abs_error) = j_k_quadrature(eps, &p, &self.opts.quadrature)?;
                Integral {
                    value,
                    abs_error,
                    fallback: true,
                    method: Method::Quadrature,
                }
            }
        };
        self.jz.insert(eps, v);
        Ok(v)
    }

    fn law_integral(&mut self, which: LawKind, tau: u32) -> Result<Integral> {
        let cache = match which {
            LawKind::BestBeamY => &self.jy,
            LawKind::BestLW => &self.jw,
            LawKind::BestLWApprox => &self.jw_approx,
            _ => unreachable!("only Y and W laws are integrated here"),
        };
        if let Some(v) = cache.get(&tau) {
            return Ok(*v);
        }
        let law = match which {
            LawKind::BestBeamY => &self.law_y,
            LawKind::BestLW => &self.law_w,
            _ => &self.law_w_approx,
        };
        let (value, abs_error) = log_rate_integral(|x| law.sf(x), tau as f64, &self.opts.quadrature)?;
        let v = Integral {
            value,
            abs_error,
            fallback: false,
            method: Method::Quadrature,
        };
        match which {
            LawKind::BestBeamY => self.jy.insert(tau, v),
            LawKind::BestLW => self.jw.insert(tau, v),
            _ => self.jw_approx.insert(tau, v),
        };
        Ok(v)
    }

    /// `J_Z(ε)`: closed form, or quadrature when the closed form is flagged.
    pub fn j_k(&mut self, epsilon: u32) -> Result<RateResult> {
        if epsilon < 1 {
            return Err(domain("J needs ε >= 1"));
        }
        let v = self.jz(epsilon)?;
        Ok(RateResult {
            value: v.value,
            method: v.method,
            error_estimate: v.abs_error,
            scheme: FeedbackScheme::FullFeedback,
            precision_fallback: v.fallback,
        })
    }

    /// `M·J_Z(K)`.
    pub fn full(&mut self, k: u32) -> Result<RateResult> {
        check_k(k)?;
        let m = self.profile.m as f64;
        let v = self.jz(k)?;
        Ok(RateResult {
            value: m * v.value,
            method: v.method,
            error_estimate: m * v.abs_error,
            scheme: FeedbackScheme::FullFeedback,
            precision_fallback: v.fallback,
        })
    }

    fn mixture<F>(&mut self, k: u32, p: f64, mut inner: F) -> Result<(f64, f64, bool)>
    where
        F: FnMut(&mut Self, u32) -> Result<Integral>,
    {
        let mut value = 0.0;
        let mut err = 0.0;
        let mut pruned = 0.0;
        let mut largest: f64 = 0.0;
        let mut fallback = false;
        for tau in 1..=k {
            let w = binomial_pmf(k as u64, tau as u64, p);
            if w < self.opts.prune_threshold {
                pruned += w;
                continue;
            }
            let v = inner(self, tau)?;
            value += w * v.value;
            err += w * v.abs_error;
            largest = largest.max(v.value);
            fallback |= v.fallback;
        }
        // Pruned tail terms are bounded by the largest inner value, doubled
        // to cover the pruned upper tail of τ.
        err += pruned * 2.0 * largest;
        Ok((value, err, fallback))
    }

    /// Spatial selective feedback, exact: `M Σ_τ B(K,1/M;τ) J_Y(τ)`.
    pub fn spatial_exact(&mut self, k: u32) -> Result<RateResult> {
        check_k(k)?;
        let m = self.profile.m as f64;
        let (v, e, fb) = self.mixture(k, 1.0 / m, |s, tau| s.law_integral(LawKind::BestBeamY, tau))?;
        Ok(rate(m * v, m * e, Method::Quadrature, FeedbackScheme::SpatialSelective, fb))
    }

    /// Spatial selective feedback with `F_Y ≈ F_Z^M`: `M Σ_τ B(K,1/M;τ) J_Z(Mτ)`.
    pub fn spatial_approx(&mut self, k: u32) -> Result<RateResult> {
        check_k(k)?;
        let m = self.profile.m;
        let mf = m as f64;
        let (v, e, fb) = self.mixture(k, 1.0 / mf, |s, tau| s.jz(m * tau))?;
        Ok(rate(mf * v, mf * e, Method::Approximation, FeedbackScheme::SpatialSelective, fb))
    }

    fn best_l_weights(&self, k: u32) -> Vec<(u32, f64)> {
        // w(τ₂) = Σ_{τ₁} B(K, 1/M; τ₁) B(τ₁, L/N; τ₂), summed in a fixed order.
        let p = &self.profile;
        let p1 = 1.0 / p.m as f64;
        let p2 = p.l as f64 / p.n as f64;
        let thr = self.opts.prune_threshold;
        let mut w = vec![0.0; k as usize + 1];
        for tau1 in 1..=k {
            let a = binomial_pmf(k as u64, tau1 as u64, p1);
            if a < thr {
                continue;
            }
            for tau2 in 1..=tau1 {
                let b = binomial_pmf(tau1 as u64, tau2 as u64, p2);
                if a * b < thr * 1e-3 {
                    continue;
                }
                w[tau2 as usize] += a * b;
            }
        }
        w.into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, x)| x >= thr)
            .map(|(t, x)| (t as u32, x))
            .collect()
    }

    // Σ_ℓ ξ₂(τ₂,ℓ) J(Nτ₂ − ℓ) when the expansion is well conditioned, else
    // the collapsed integral against the τ₂-th power of the mixed law.
    fn best_l_inner(&mut self, tau2: u32, approx: bool) -> Result<Integral> {
        let p = self.profile;
        let quad_rel = if approx {
            self.opts.precision_tol.min(self.opts.quadrature.rel_tol)
        } else {
            self.opts.quadrature.rel_tol
        };
        let growth = (tau2 as f64) * self.xi_abs.ln();
        let expand = growth + quad_rel.ln() <= self.opts.precision_tol.ln();
        if expand {
            let row = self.table.xi2_row(p.n, p.l, tau2)?;
            let mut acc = 0.0;
            let mut abs_acc = 0.0;
            let mut err = 0.0;
            let mut fallback = false;
            let mut method = Method::ClosedForm;
            for (ell, c) in row.iter().enumerate() {
                let c = crate::distributions::rational_to_f64(c);
                if c == 0.0 {
                    continue;
                }
                let expo = p.n * tau2 - ell as u32;
                let v = if approx {
                    self.jz(p.m * expo)?
                } else {
                    self.law_integral(LawKind::BestBeamY, expo)?
                };
                fallback |= v.fallback;
                if v.method == Method::Quadrature {
                    method = Method::Quadrature;
                }
                acc += c * v.value;
                abs_acc += (c * v.value).abs();
                err += c.abs() * v.abs_error;
            }
            err += abs_acc * 4.0 * f64::EPSILON;
            if err <= self.opts.precision_tol * acc.abs().max(f64::MIN_POSITIVE) {
                return Ok(Integral {
                    value: acc,
                    abs_error: err,
                    fallback,
                    method,
                });
            }
        }
        let which = if approx {
            LawKind::BestLWApprox
        } else {
            LawKind::BestLW
        };
        let mut v = self.law_integral(which, tau2)?;
        // Degenerate depths expand exactly; anything else arriving here is a
        // deliberate fallback from the expanded sum.
        v.fallback = !(p.l == 1 || p.l == p.n) || v.fallback;
        Ok(v)
    }

    /// Best-L feedback, exact law of `Y`.
    pub fn best_l_exact(&mut self, k: u32) -> Result<RateResult> {
        check_k(k)?;
        let m = self.profile.m as f64;
        let (v, e, fb) = self.best_l_sum(k, false)?;
        Ok(rate(m * v, m * e, Method::Quadrature, FeedbackScheme::BestL, fb))
    }

    /// Best-L feedback with `F_Y ≈ F_Z^M`, through `J_Z`.
    pub fn best_l_approx(&mut self, k: u32) -> Result<RateResult> {
        check_k(k)?;
        let m = self.profile.m as f64;
        let (v, e, fb) = self.best_l_sum(k, true)?;
        Ok(rate(m * v, m * e, Method::Approximation, FeedbackScheme::BestL, fb))
    }

    fn best_l_sum(&mut self, k: u32, approx: bool) -> Result<(f64, f64, bool)> {
        let weights = self.best_l_weights(k);
        let mass: f64 = weights.iter().map(|w| w.1).sum();
        let total = 1.0 - binomial_pmf(k as u64, 0, self.profile.l as f64 / (self.profile.m as f64 * self.profile.n as f64));
        let mut value = 0.0;
        let mut err = 0.0;
        let mut largest: f64 = 0.0;
        let mut fallback = false;
        for (tau2, w) in weights {
            let v = self.best_l_inner(tau2, approx)?;
            value += w * v.value;
            err += w * v.abs_error;
            largest = largest.max(v.value);
            fallback |= v.fallback;
        }
        err += (total - mass).abs() * 2.0 * largest;
        Ok((value, err, fallback))
    }

    pub fn individual_sum_rate(&mut self, scheme: FeedbackScheme, k: u32, approx: bool) -> Result<RateResult> {
        match (scheme, approx) {
            (FeedbackScheme::FullFeedback, _) => self.full(k),
            (FeedbackScheme::SpatialSelective, false) => self.spatial_exact(k),
            (FeedbackScheme::SpatialSelective, true) => self.spatial_approx(k),
            (FeedbackScheme::BestL, false) => self.best_l_exact(k),
            (FeedbackScheme::BestL, true) => self.best_l_approx(k),
        }
    }
}

fn rate(value: f64, err: f64, method: Method, scheme: FeedbackScheme, fallback: bool) -> RateResult {
    RateResult {
        value: value.max(0.0),
        method,
        error_estimate: err.abs(),
        scheme,
        precision_fallback: fallback,
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(domain("K must be at least 1"));
    }
    Ok(())
}

fn engine(p: &UserChannelProfile) -> Result<RateEngine> {
    RateEngine::new(*p, RateOptions::default())
}

/// `J_Z(ε) = ∫ log₂(1+x) dF_Z(x)^ε`.
pub fn j_k(epsilon: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.j_k(epsilon)
}

/// `K·R_k = M·J_Z(K)` under full feedback.
pub fn individual_sum_rate_full(k: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.full(k)
}

/// `(M/K) Σ_k J_{Z_k}(K)` over the users of `config`.
pub fn sum_rate_full(config: &SystemConfig) -> Result<RateResult> {
    config.validate().map_err(|e| match e {
        Error::Config(s) => Error::Domain(s),
        e => e,
    })?;
    let m = config.m as f64;
    let k = config.k;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut fallback = false;
    let mut method = Method::ClosedForm;
    let mut cache: Vec<(f64, Integral)> = Vec::new();
    for user in 0..k as usize {
        let rho = config.rho[user];
        let v = if let Some((_, v)) = cache.iter().find(|(r, _)| *r == rho) {
            *v
        } else {
            let p = config.profile(user).with_depth(1, 1);
            let v = engine(&p)?.jz(k)?;
            cache.push((rho, v));
            v
        };
        value += v.value;
        err += v.abs_error;
        fallback |= v.fallback;
        if v.method == Method::Quadrature {
            method = Method::Quadrature;
        }
    }
    Ok(rate(
        m * value / k as f64,
        m * err / k as f64,
        method,
        FeedbackScheme::FullFeedback,
        fallback,
    ))
}

pub fn individual_sum_rate_spatial_exact(k: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.spatial_exact(k)
}

pub fn individual_sum_rate_spatial_approx(k: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.spatial_approx(k)
}

pub fn individual_sum_rate_best_l_exact(k: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.best_l_exact(k)
}

pub fn individual_sum_rate_best_l_approx(k: u32, p: &UserChannelProfile) -> Result<RateResult> {
    engine(p)?.best_l_approx(k)
}
