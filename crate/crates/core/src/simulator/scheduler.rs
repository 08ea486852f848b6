use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::feedback::{apply_feedback_into, FeedbackReport, SinrTable};
use crate::config::{CdfSource, FeedbackScheme, SchedulerKind, SystemConfig};
use crate::distributions::{LawKind, SinrLaw, UserChannelProfile};
use crate::error::{config, Error, Result};

/// Fewest calibration drops accepted for an empirical CDF.
pub const MIN_CALIBRATION_DROPS: usize = 1000;

// Keeps calibration draws disjoint from the drop streams.
const CALIBRATION_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Step CDF of a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_CALIBRATION_DROPS {
            return Err(Error::InsufficientSamples {
                needed: MIN_CALIBRATION_DROPS,
                got: samples.len(),
            });
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sf(&self, x: f64) -> f64 {
        let above = self.sorted.len() - self.sorted.partition_point(|&s| s <= x);
        above as f64 / self.sorted.len() as f64
    }
}

/// Per-user empirical CDFs together with the scheme they describe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdfs {
    pub scheme: FeedbackScheme,
    pub cdfs: Vec<EmpiricalCdf>,
}

/// The law the CDF-based scheduler needs for each scheme.
pub fn scheme_law_kind(scheme: FeedbackScheme) -> LawKind {
    match scheme {
        FeedbackScheme::FullFeedback => LawKind::PerBeamZ,
        FeedbackScheme::SpatialSelective => LawKind::BestBeamY,
        FeedbackScheme::BestL => LawKind::BestLW,
    }
}

/// The scheme's per-report variable for a single user in a single drop:
/// a per-beam SINR, the best-beam SINR, or one of the best-L reports chosen
/// uniformly.
fn report_variable<R: Rng>(rho: f64, n: u32, m: u32, l: u32, scheme: FeedbackScheme, rng: &mut R, buf: &mut Vec<FeedbackReport>) -> f64 {
    let table = SinrTable::draw(&[rho], n as usize, m as usize, rng);
    apply_feedback_into(&table, scheme, l as usize, buf);
    match scheme {
        FeedbackScheme::FullFeedback | FeedbackScheme::SpatialSelective => buf[0].sinr,
        FeedbackScheme::BestL => buf[rng.random_range(0..buf.len())].sinr,
    }
}

/// Independent draws of the variable the scheduler ranks under `scheme`
/// (`Z`, `Y` or `W`) for one user, one per simulated drop.
pub fn sample_report_variable(
    profile: &UserChannelProfile,
    scheme: FeedbackScheme,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut buf = Vec::new();
    (0..samples)
        .map(|_| report_variable(profile.rho, profile.n, profile.m, profile.l, scheme, &mut rng, &mut buf))
        .collect()
}

/// Learns each user's CDF from `calibration_drops` independent drops of that
/// user alone.
pub fn calibrate_empirical_cdf(cfg: &SystemConfig, calibration_drops: usize) -> Result<EmpiricalCdfs> {
    cfg.validate()?;
    if calibration_drops < MIN_CALIBRATION_DROPS {
        return Err(Error::InsufficientSamples {
            needed: MIN_CALIBRATION_DROPS,
            got: calibration_drops,
        });
    }
    let cdfs = cfg
        .rho
        .par_iter()
        .enumerate()
        .map(|(user, _)| {
            let samples = sample_report_variable(
                &cfg.profile(user),
                cfg.scheme,
                calibration_drops,
                cfg.seed ^ CALIBRATION_SEED_SALT,
                user as u64,
            );
            EmpiricalCdf::new(samples)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalCdfs {
        scheme: cfg.scheme,
        cdfs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotOutcome {
    pub selected_user: Option<u32>,
    /// Raw SINR of the winner, 0 on outage.
    pub sinr: f64,
    pub rate_contribution: f64,
    pub feedback_count: u32,
}

/// One drop's scheduling decisions, indexed by `rb·M + beam`.
#[derive(Clone, Debug, PartialEq)]
pub struct DropOutcome {
    pub m: u32,
    pub n: u32,
    pub slots: Vec<SlotOutcome>,
}

impl DropOutcome {
    pub fn slot(&self, rb: usize, beam: usize) -> &SlotOutcome {
        &self.slots[rb * self.m as usize + beam]
    }
}

#[derive(Clone, Debug)]
enum Metric {
    /// Rank by raw SINR. Exact for greedy, and for CDF scheduling when all
    /// users share one law, since the transform is then a common increasing
    /// map.
    Raw,
    /// Rank by the user's own survival function at the reported value; the
    /// smallest wins. Same order as the largest CDF value but without the
    /// saturation of `F` near 1.
    Analytic { laws: Vec<SinrLaw>, law_of_user: Vec<usize> },
    Empirical(EmpiricalCdfs),
}

/// Decides who gets each (resource block, beam).
#[derive(Clone, Debug)]
pub struct Scheduler {
    kind: SchedulerKind,
    k: usize,
    n: usize,
    m: usize,
    metric: Metric,
}

impl Scheduler {
    /// Analytic laws come from the scheme; empirical CDFs must be supplied
    /// when the config asks for them.
    pub fn new(cfg: &SystemConfig, empirical: Option<EmpiricalCdfs>) -> Result<Self> {
        cfg.validate()?;
        let metric = match cfg.scheduler {
            SchedulerKind::Greedy | SchedulerKind::RoundRobin => Metric::Raw,
            SchedulerKind::CdfBased => match cfg.cdf_source {
                CdfSource::Analytic => {
                    let first = cfg.rho[0];
                    if cfg.rho.iter().all(|&r| r == first) {
                        Metric::Raw
                    } else {
                        let kind = scheme_law_kind(cfg.scheme);
                        let mut seen: Vec<f64> = Vec::new();
                        let mut laws = Vec::new();
                        let mut law_of_user = Vec::with_capacity(cfg.rho.len());
                        for (user, &r) in cfg.rho.iter().enumerate() {
                            let idx = match seen.iter().position(|&d| d == r) {
                                Some(i) => i,
                                None => {
                                    seen.push(r);
                                    laws.push(SinrLaw::new(kind, cfg.profile(user))?);
                                    laws.len() - 1
                                }
                            };
                            law_of_user.push(idx);
                        }
                        Metric::Analytic { laws, law_of_user }
                    }
                }
                CdfSource::Empirical { .. } => {
                    let e = empirical
                        .ok_or_else(|| config("empirical CDF source selected but no calibration supplied"))?;
                    check_empirical(cfg, &e)?;
                    Metric::Empirical(e)
                }
            },
        };
        Ok(Scheduler {
            kind: cfg.scheduler,
            k: cfg.k as usize,
            n: cfg.n as usize,
            m: cfg.m as usize,
            metric,
        })
    }

    /// CDF-based scheduler with explicitly supplied per-user laws.
    pub fn with_laws(cfg: &SystemConfig, laws: Vec<SinrLaw>) -> Result<Self> {
        cfg.validate()?;
        if laws.len() != cfg.k as usize {
            return Err(config(format!("{} laws supplied for K = {}", laws.len(), cfg.k)));
        }
        let want = scheme_law_kind(cfg.scheme);
        if let Some(l) = laws.iter().find(|l| l.kind() != want) {
            return Err(config(format!(
                "scheme {} needs {} CDFs, got {}",
                cfg.scheme.name(),
                want.name(),
                l.kind().name()
            )));
        }
        Ok(Scheduler {
            kind: SchedulerKind::CdfBased,
            k: cfg.k as usize,
            n: cfg.n as usize,
            m: cfg.m as usize,
            metric: Metric::Analytic {
                law_of_user: (0..laws.len()).collect(),
                laws,
            },
        })
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    // Smaller is better.
    fn key(&self, r: &FeedbackReport) -> f64 {
        match &self.metric {
            Metric::Raw => -r.sinr,
            Metric::Analytic { laws, law_of_user } => laws[law_of_user[r.user as usize]].sf(r.sinr),
            Metric::Empirical(e) => e.cdfs[r.user as usize].sf(r.sinr),
        }
    }

    /// Assigns every slot. Ties go to the lowest user id; a slot nobody
    /// reported on is an outage with zero rate. Round robin ignores the
    /// reports and serves user `((t·N + n)·M + m) mod K` at its actual SINR.
    pub fn schedule(&self, table: &SinrTable, reports: &[FeedbackReport], drop_index: u64) -> DropOutcome {
        let slots_n = self.n * self.m;
        let mut best: Vec<Option<(f64, u32, f64)>> = vec![None; slots_n];
        let mut counts = vec![0u32; slots_n];
        let m = self.m;
        match (&self.metric, self.kind) {
            (_, SchedulerKind::RoundRobin) => {
                for r in reports {
                    counts[r.rb as usize * m + r.beam as usize] += 1;
                }
            }
            (Metric::Raw, _) => {
                for r in reports {
                    let s = r.rb as usize * m + r.beam as usize;
                    counts[s] += 1;
                    match best[s] {
                        Some((k0, _, _)) if !(-r.sinr < k0) => {}
                        _ => best[s] = Some((-r.sinr, r.user, r.sinr)),
                    }
                }
            }
            _ => {
                for r in reports {
                    let s = r.rb as usize * m + r.beam as usize;
                    counts[s] += 1;
                    let key = self.key(r);
                    match best[s] {
                        Some((k0, _, _)) if !(key < k0) => {}
                        _ => best[s] = Some((key, r.user, r.sinr)),
                    }
                }
            }
        }
        let slots = (0..slots_n)
            .map(|s| {
                let winner = if self.kind == SchedulerKind::RoundRobin {
                    let (rb, beam) = (s / self.m, s % self.m);
                    let idx = (drop_index as u128 * self.n as u128 + rb as u128) * self.m as u128 + beam as u128;
                    let user = (idx % self.k as u128) as usize;
                    Some((user as u32, table.get(user, rb, beam)))
                } else {
                    best[s].map(|(_, u, x)| (u, x))
                };
                match winner {
                    Some((u, x)) => SlotOutcome {
                        selected_user: Some(u),
                        sinr: x,
                        rate_contribution: x.ln_1p() / std::f64::consts::LN_2,
                        feedback_count: counts[s],
                    },
                    None => SlotOutcome {
                        selected_user: None,
                        sinr: 0.0,
                        rate_contribution: 0.0,
                        feedback_count: counts[s],
                    },
                }
            })
            .collect();
        DropOutcome {
            m: self.m as u32,
            n: self.n as u32,
            slots,
        }
    }
}

fn check_empirical(cfg: &SystemConfig, e: &EmpiricalCdfs) -> Result<()> {
    if e.scheme != cfg.scheme {
        return Err(config(format!(
            "empirical CDFs were calibrated for {} feedback but the run uses {}",
            e.scheme.name(),
            cfg.scheme.name()
        )));
    }
    if e.cdfs.len() != cfg.k as usize {
        return Err(config(format!("{} empirical CDFs for K = {}", e.cdfs.len(), cfg.k)));
    }
    Ok(())
}
