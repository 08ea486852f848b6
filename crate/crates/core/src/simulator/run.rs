use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::feedback::{apply_feedback_into, FeedbackReport, SinrTable};
use super::scheduler::{calibrate_empirical_cdf, DropOutcome, EmpiricalCdfs, Scheduler};
use crate::config::{CdfSource, SchedulerKind, SystemConfig};
use crate::error::Result;
use crate::stats::batch_mean_se;

/// Batches used for the batch-means standard errors.
pub const BATCHES: u64 = 20;

// Work unit for the parallel reduction. Fixed so that the summation order,
// and hence every bit of the estimate, is independent of the thread count.
const CHUNK_DROPS: u64 = 64;

/// The drop pipeline for one configuration: channel draw, feedback,
/// scheduling. Drop `t` always uses stream `t` of the configured seed.
#[derive(Clone, Debug)]
pub struct DropSimulator {
    cfg: SystemConfig,
    scheduler: Scheduler,
}

/// Everything one drop produced.
#[derive(Clone, Debug)]
pub struct DropRecord {
    pub table: SinrTable,
    pub reports: Vec<FeedbackReport>,
    pub outcome: DropOutcome,
}

impl DropSimulator {
    /// Calibrates empirical CDFs first when the config asks for them.
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let empirical = match (cfg.scheduler, cfg.cdf_source) {
            (SchedulerKind::CdfBased, CdfSource::Empirical { calibration_drops }) => {
                Some(calibrate_empirical_cdf(cfg, calibration_drops)?)
            }
            _ => None,
        };
        Self::with_empirical(cfg, empirical)
    }

    pub fn with_empirical(cfg: &SystemConfig, empirical: Option<EmpiricalCdfs>) -> Result<Self> {
        Ok(DropSimulator {
            cfg: cfg.clone(),
            scheduler: Scheduler::new(cfg, empirical)?,
        })
    }

    pub fn with_scheduler(cfg: &SystemConfig, scheduler: Scheduler) -> Result<Self> {
        cfg.validate()?;
        Ok(DropSimulator {
            cfg: cfg.clone(),
            scheduler,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    fn rng(&self, drop_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(drop_index);
        rng
    }

    pub fn drop(&self, drop_index: u64) -> DropRecord {
        let mut reports = Vec::new();
        let (table, outcome) = self.drop_into(drop_index, &mut reports);
        DropRecord {
            table,
            reports,
            outcome,
        }
    }

    fn drop_into(&self, drop_index: u64, reports: &mut Vec<FeedbackReport>) -> (SinrTable, DropOutcome) {
        let mut rng = self.rng(drop_index);
        let table = SinrTable::draw(&self.cfg.rho, self.cfg.n as usize, self.cfg.m as usize, &mut rng);
        apply_feedback_into(&table, self.cfg.scheme, self.cfg.l as usize, reports);
        let outcome = self.scheduler.schedule(&table, reports, drop_index);
        (table, outcome)
    }

    /// Scheduler-side SINR of every non-outage slot, in drop order.
    pub fn scheduler_maxima(&self, drops: u64) -> Vec<f64> {
        let chunks: Vec<(u64, u64)> = chunk_ranges(0, drops);
        let parts: Vec<Vec<f64>> = chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut buf = Vec::new();
                let mut out = Vec::new();
                for t in a..b {
                    let (_, o) = self.drop_into(t, &mut buf);
                    out.extend(o.slots.iter().filter(|s| s.selected_user.is_some()).map(|s| s.sinr));
                }
                out
            })
            .collect();
        parts.concat()
    }

    /// Runs `cfg.drops` drops and reduces them into estimates.
    pub fn run(&self) -> SimulationEstimate {
        let drops = self.cfg.drops;
        let k = self.cfg.k as usize;
        let batches = BATCHES.min(drops);
        let mut units = Vec::new();
        for b in 0..batches {
            let (lo, hi) = (b * drops / batches, (b + 1) * drops / batches);
            for (a, z) in chunk_ranges(lo, hi) {
                units.push((b as usize, a, z));
            }
        }
        let parts: Vec<(usize, Accumulator)> = units
            .par_iter()
            .map(|&(b, a, z)| {
                let mut acc = Accumulator::new(&self.cfg);
                let mut buf = Vec::new();
                for t in a..z {
                    let (_, o) = self.drop_into(t, &mut buf);
                    acc.add(&o, k);
                }
                (b, acc)
            })
            .collect();
        let mut per_batch: Vec<Accumulator> = (0..batches).map(|_| Accumulator::new(&self.cfg)).collect();
        for (b, acc) in parts {
            per_batch[b].merge(&acc);
        }
        SimulationEstimate::from_batches(&self.cfg, &per_batch)
    }
}

fn chunk_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut v = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + CHUNK_DROPS).min(hi);
        v.push((a, b));
        a = b;
    }
    v
}

#[derive(Clone, Debug)]
struct Accumulator {
    drops: u64,
    // Σ over drops of (1/N) Σ_{slots won} log₂(1 + SINR), per user.
    rate: Vec<f64>,
    wins: Vec<u64>,
    outages: Vec<u64>,
    multi_win_blocks: u64,
    count_hist: Vec<u64>,
}

impl Accumulator {
    fn new(cfg: &SystemConfig) -> Self {
        let k = cfg.k as usize;
        Accumulator {
            drops: 0,
            rate: vec![0.0; k],
            wins: vec![0; k],
            outages: vec![0; (cfg.n * cfg.m) as usize],
            multi_win_blocks: 0,
            count_hist: vec![0; k + 1],
        }
    }

    fn add(&mut self, o: &DropOutcome, k: usize) {
        self.drops += 1;
        let n = o.n as f64;
        let m = o.m as usize;
        for (s, slot) in o.slots.iter().enumerate() {
            self.count_hist[(slot.feedback_count as usize).min(k)] += 1;
            match slot.selected_user {
                Some(u) => {
                    self.rate[u as usize] += slot.rate_contribution / n;
                    self.wins[u as usize] += 1;
                }
                None => self.outages[s] += 1,
            }
        }
        for block in o.slots.chunks(m) {
            let mut users: Vec<u32> = block.iter().filter_map(|s| s.selected_user).collect();
            let before = users.len();
            users.sort_unstable();
            users.dedup();
            if users.len() < before {
                self.multi_win_blocks += 1;
            }
        }
    }

    fn merge(&mut self, o: &Accumulator) {
        self.drops += o.drops;
        for (a, b) in self.rate.iter_mut().zip(&o.rate) {
            *a += b;
        }
        for (a, b) in self.wins.iter_mut().zip(&o.wins) {
            *a += b;
        }
        for (a, b) in self.outages.iter_mut().zip(&o.outages) {
            *a += b;
        }
        self.multi_win_blocks += o.multi_win_blocks;
        for (a, b) in self.count_hist.iter_mut().zip(&o.count_hist) {
            *a += b;
        }
    }
}

/// Monte Carlo estimates with batch-means standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub drops: u64,
    pub batches: u64,
    /// Mean rate `R_k` of each user, bits/s/Hz per resource block.
    pub user_rate: Vec<f64>,
    pub user_rate_se: Vec<f64>,
    /// `K · R_k`.
    pub individual_sum_rate: Vec<f64>,
    pub individual_sum_rate_se: Vec<f64>,
    /// Average of the individual sum rates over users.
    pub mean_individual_sum_rate: f64,
    pub mean_individual_sum_rate_se: f64,
    /// `Σ_k R_k`.
    pub sum_rate: f64,
    pub sum_rate_se: f64,
    /// Fraction of all (drop, block, beam) slots won by each user.
    pub selection_frequency: Vec<f64>,
    pub selection_frequency_se: Vec<f64>,
    /// Outage fraction of each (block, beam) slot, indexed `rb·M + beam`.
    pub outage_fraction: Vec<f64>,
    pub outage_fraction_se: Vec<f64>,
    /// Fraction of (drop, block) pairs in which some user won two or more beams.
    pub multi_beam_fraction: f64,
    /// Histogram of per-slot reporter counts, index = count.
    pub feedback_count_histogram: Vec<u64>,
}

impl SimulationEstimate {
    fn from_batches(cfg: &SystemConfig, batches: &[Accumulator]) -> Self {
        let k = cfg.k as usize;
        let kf = k as f64;
        let slots = (cfg.n * cfg.m) as usize;
        let mut total = Accumulator::new(cfg);
        for b in batches {
            total.merge(b);
        }
        let d = total.drops as f64;
        let se_of = |f: &dyn Fn(&Accumulator) -> f64| -> f64 {
            let means: Vec<f64> = batches.iter().map(f).collect();
            batch_mean_se(&means).1
        };
        let mut user_rate = Vec::with_capacity(k);
        let mut user_rate_se = Vec::with_capacity(k);
        let mut selection_frequency = Vec::with_capacity(k);
        let mut selection_frequency_se = Vec::with_capacity(k);
        for u in 0..k {
            user_rate.push(total.rate[u] / d);
            user_rate_se.push(se_of(&|a| a.rate[u] / a.drops as f64));
            selection_frequency.push(total.wins[u] as f64 / (d * slots as f64));
            selection_frequency_se.push(se_of(&|a| a.wins[u] as f64 / (a.drops as f64 * slots as f64)));
        }
        let sum_rate = user_rate.iter().sum::<f64>();
        let sum_rate_se = se_of(&|a| a.rate.iter().sum::<f64>() / a.drops as f64);
        let outage_fraction = total.outages.iter().map(|&o| o as f64 / d).collect();
        let outage_fraction_se = (0..slots)
            .map(|s| se_of(&|a| a.outages[s] as f64 / a.drops as f64))
            .collect();
        SimulationEstimate {
            drops: total.drops,
            batches: batches.len() as u64,
            individual_sum_rate: user_rate.iter().map(|r| kf * r).collect(),
            individual_sum_rate_se: user_rate_se.iter().map(|s| kf * s).collect(),
            // The mean of K·R_k over users is the sum rate.
            mean_individual_sum_rate: sum_rate,
            mean_individual_sum_rate_se: sum_rate_se,
            sum_rate,
            sum_rate_se,
            user_rate,
            user_rate_se,
            selection_frequency,
            selection_frequency_se,
            outage_fraction,
            outage_fraction_se,
            multi_beam_fraction: total.multi_win_blocks as f64 / (d * cfg.n as f64),
            feedback_count_histogram: total.count_hist,
        }
    }
}

/// Runs the configuration end to end.
pub fn run_drops(cfg: &SystemConfig) -> Result<SimulationEstimate> {
    Ok(DropSimulator::new(cfg)?.run())
}
