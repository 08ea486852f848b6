//! System-level configuration shared by the analytic and simulated paths.

use serde::{Deserialize, Serialize};

use crate::distributions::UserChannelProfile;
use crate::error::{config, Result};

/// What each user feeds back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackScheme {
    /// Every beam on every resource block.
    #[serde(alias = "full")]
    FullFeedback,
    /// The best beam on each resource block.
    #[serde(alias = "spatial")]
    SpatialSelective,
    /// The best beam on each of the best `L` resource blocks.
    #[serde(alias = "best-l", alias = "bestl")]
    BestL,
}

impl FeedbackScheme {
    pub fn name(self) -> &'static str {
        match self {
            FeedbackScheme::FullFeedback => "full",
            FeedbackScheme::SpatialSelective => "spatial",
            FeedbackScheme::BestL => "best_l",
        }
    }

    /// Probability that a given user reports on a given (resource block, beam).
    pub fn report_probability(self, m: u32, n: u32, l: u32) -> f64 {
        match self {
            FeedbackScheme::FullFeedback => 1.0,
            FeedbackScheme::SpatialSelective => 1.0 / m as f64,
            FeedbackScheme::BestL => l as f64 / (m as f64 * n as f64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    /// Largest value of the user's own CDF evaluated at the reported SINR.
    #[serde(alias = "cdf")]
    CdfBased,
    /// Largest raw SINR.
    Greedy,
    /// Beam `m` of drop `t` goes to user `(t·M + m) mod K`, ignoring feedback.
    RoundRobin,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::CdfBased => "cdf",
            SchedulerKind::Greedy => "greedy",
            SchedulerKind::RoundRobin => "round_robin",
        }
    }
}

/// Where the CDF-based scheduler gets its per-user CDFs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfSource {
    Analytic,
    Empirical { calibration_drops: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub m: u32,
    pub k: u32,
    pub n: u32,
    pub l: u32,
    /// Per-user average SNR, linear.
    pub rho: Vec<f64>,
    pub scheme: FeedbackScheme,
    pub scheduler: SchedulerKind,
    pub drops: u64,
    pub seed: u64,
    pub cdf_source: CdfSource,
}

impl SystemConfig {
    /// Homogeneous narrowband configuration with analytic CDF scheduling.
    pub fn homogeneous(m: u32, k: u32, rho: f64, scheme: FeedbackScheme) -> Self {
        SystemConfig {
            m,
            k,
            n: 1,
            l: 1,
            rho: vec![rho; k as usize],
            scheme,
            scheduler: SchedulerKind::CdfBased,
            drops: 1000,
            seed: 0,
            cdf_source: CdfSource::Analytic,
        }
    }

    pub fn with_blocks(mut self, n: u32, l: u32) -> Self {
        self.n = n;
        self.l = l;
        self
    }

    pub fn with_drops(mut self, drops: u64) -> Self {
        self.drops = drops;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scheduler(mut self, scheduler: SchedulerKind) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn with_cdf_source(mut self, src: CdfSource) -> Self {
        self.cdf_source = src;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(config("M must be at least 1"));
        }
        if self.k < 1 {
            return Err(config("K must be at least 1"));
        }
        if self.n < 1 || self.l < 1 || self.l > self.n {
            return Err(config(format!(
                "need 1 <= L <= N, got N={}, L={}",
                self.n, self.l
            )));
        }
        if self.rho.len() != self.k as usize {
            return Err(config(format!(
                "rho has {} entries but K = {}",
                self.rho.len(),
                self.k
            )));
        }
        if let Some(r) = self.rho.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(config(format!("rho entries must be positive, got {r}")));
        }
        if self.drops < 1 {
            return Err(config("drops must be at least 1"));
        }
        Ok(())
    }

    /// Channel profile of user `k`.
    pub fn profile(&self, user: usize) -> UserChannelProfile {
        UserChannelProfile {
            m: self.m,
            rho: self.rho[user],
            n: self.n,
            l: self.l,
        }
    }

    pub fn report_probability(&self) -> f64 {
        self.scheme.report_probability(self.m, self.n, self.l)
    }
}
