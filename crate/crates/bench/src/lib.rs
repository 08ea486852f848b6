//! Shared fixtures for the benchmarks.

use randbeam::distributions::{db_to_linear, UserChannelProfile};
use randbeam::{FeedbackScheme, SystemConfig};

pub fn profile(m: u32, rho_db: f64, n: u32, l: u32) -> UserChannelProfile {
    UserChannelProfile::new(m, db_to_linear(rho_db), n, l).expect("valid fixture")
}

/// Homogeneous system at 10 dB.
pub fn system(m: u32, k: u32, scheme: FeedbackScheme, n: u32, l: u32) -> SystemConfig {
    SystemConfig::homogeneous(m, k, db_to_linear(10.0), scheme)
        .with_blocks(n, l)
        .with_seed(3)
}
