pub mod config;
pub mod distributions;
pub mod error;
pub mod numerics;
pub mod rates;
pub mod scaling;
pub mod simulator;
pub mod stats;
pub mod validation;

pub use config::{CdfSource, FeedbackScheme, SchedulerKind, SystemConfig};
pub use error::{Error, Result};
