//! Experiment files.
//!
//! One TOML schema serves every subcommand. `[system]` describes a single
//! system for `simulate`; `[grid]` describes the parameter sweep used by
//! `rate-table` and `scaling`. Both are optional and fall back to defaults.
//!
//! ```toml
//! name = "spatial-sweep"
//!
//! [system]
//! m = 4
//! k = 10
//! rho_db = 10.0            # or one value per user: [0.0, 0.0, 10.0, ...]
//! scheme = "spatial"       # full | spatial | best-l
//! scheduler = "cdf"        # cdf | greedy | round-robin
//! cdf_source = "analytic"  # analytic | empirical
//! calibration_drops = 5000
//! drops = 20000
//! seed = 7
//!
//! [grid]
//! k = [1, 2, 5, 10, 20, 50]
//! m = [2, 4]
//! rho_db = [0.0, 10.0, 20.0]
//! n = 10
//! l = [1, 2]
//! schemes = ["full", "spatial", "best-l"]
//! drops = 10000            # scaling only: drops per K for the Gumbel check, 0 skips it
//! ```
//!
//! Full and spatial rates are tabulated at `N = 1`; the grid's `n` and `l`
//! only apply to best-L.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use randbeam::distributions::db_to_linear;
use randbeam::{CdfSource, FeedbackScheme, SchedulerKind, SystemConfig};

/// A problem with the experiment description itself. The binary maps it to
/// exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub name: Option<String>,
    pub system: Option<SystemSection>,
    pub grid: Option<GridSection>,
}

/// Either one SNR for every user or one per user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoDb {
    Common(f64),
    PerUser(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfSourceName {
    Analytic,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub m: u32,
    pub k: u32,
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default = "one")]
    pub l: u32,
    pub rho_db: RhoDb,
    pub scheme: FeedbackScheme,
    #[serde(default = "cdf_scheduler")]
    pub scheduler: SchedulerKind,
    #[serde(default = "analytic")]
    pub cdf_source: CdfSourceName,
    #[serde(default = "calibration_default")]
    pub calibration_drops: usize,
    pub drops: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub k: Vec<u32>,
    pub m: Vec<u32>,
    pub rho_db: Vec<f64>,
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default = "ones")]
    pub l: Vec<u32>,
    pub schemes: Vec<FeedbackScheme>,
    pub drops: Option<u64>,
    pub seed: Option<u64>,
}

fn one() -> u32 {
    1
}

fn ones() -> Vec<u32> {
    vec![1]
}

fn cdf_scheduler() -> SchedulerKind {
    SchedulerKind::CdfBased
}

fn analytic() -> CdfSourceName {
    CdfSourceName::Analytic
}

fn calibration_default() -> usize {
    5000
}

/// Values given on the command line; they win over the file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub drops: Option<u64>,
    pub tol: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 1;

impl ExperimentFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }
}

impl SystemSection {
    pub fn default_simulation() -> Self {
        SystemSection {
            m: 4,
            k: 10,
            n: 1,
            l: 1,
            rho_db: RhoDb::Common(10.0),
            scheme: FeedbackScheme::SpatialSelective,
            scheduler: SchedulerKind::CdfBased,
            cdf_source: CdfSourceName::Analytic,
            calibration_drops: calibration_default(),
            drops: Some(20_000),
            seed: None,
        }
    }

    pub fn rho_db_per_user(&self) -> anyhow::Result<Vec<f64>> {
        match &self.rho_db {
            RhoDb::Common(db) => Ok(vec![*db; self.k as usize]),
            RhoDb::PerUser(v) if v.len() == self.k as usize => Ok(v.clone()),
            RhoDb::PerUser(v) => Err(bad(format!("rho_db lists {} users but k = {}", v.len(), self.k))),
        }
    }

    pub fn to_system_config(&self, ov: &Overrides) -> anyhow::Result<SystemConfig> {
        let rho_db = self.rho_db_per_user()?;
        if let Some(db) = rho_db.iter().find(|d| !d.is_finite()) {
            return Err(bad(format!("rho_db must be finite, got {db}")));
        }
        let cdf_source = match self.cdf_source {
            CdfSourceName::Analytic => CdfSource::Analytic,
            CdfSourceName::Empirical => CdfSource::Empirical {
                calibration_drops: self.calibration_drops,
            },
        };
        let cfg = SystemConfig {
            m: self.m,
            k: self.k,
            n: self.n,
            l: self.l,
            rho: rho_db.iter().map(|&d| db_to_linear(d)).collect(),
            scheme: self.scheme,
            scheduler: self.scheduler,
            drops: ov.drops.or(self.drops).unwrap_or(20_000),
            seed: ov.seed.or(self.seed).unwrap_or(DEFAULT_SEED),
            cdf_source,
        };
        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }
}

impl GridSection {
    pub fn default_rate_table() -> Self {
        GridSection {
            k: vec![1, 2, 5, 10, 20, 50],
            m: vec![2, 4],
            rho_db: vec![0.0, 10.0, 20.0],
            n: 10,
            l: vec![1, 2, 4],
            schemes: vec![
                FeedbackScheme::FullFeedback,
                FeedbackScheme::SpatialSelective,
                FeedbackScheme::BestL,
            ],
            drops: None,
            seed: None,
        }
    }

    pub fn default_scaling() -> Self {
        GridSection {
            k: vec![100, 1000, 10000],
            m: vec![2],
            rho_db: vec![10.0],
            n: 4,
            l: vec![1],
            schemes: vec![
                FeedbackScheme::FullFeedback,
                FeedbackScheme::SpatialSelective,
                FeedbackScheme::BestL,
            ],
            drops: Some(10_000),
            seed: None,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let empty = [
            ("k", self.k.is_empty()),
            ("m", self.m.is_empty()),
            ("rho_db", self.rho_db.is_empty()),
            ("l", self.l.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(bad(format!("grid.{name} is empty")));
        }
        if self.k.contains(&0) || self.m.contains(&0) {
            return Err(bad("grid k and m entries must be at least 1"));
        }
        if self.n < 1 {
            return Err(bad("grid.n must be at least 1"));
        }
        if let Some(l) = self.l.iter().find(|&&l| l < 1 || l > self.n) {
            return Err(bad(format!("grid.l entry {l} is outside 1..={}", self.n)));
        }
        if let Some(db) = self.rho_db.iter().find(|d| !d.is_finite()) {
            return Err(bad(format!("grid.rho_db must be finite, got {db}")));
        }
        Ok(())
    }
}
