//! Monte Carlo drops: Haar beams, Rayleigh channels, the three feedback
//! schemes, CDF-based scheduling and the greedy and round-robin baselines.

mod beams;
mod feedback;
mod run;
mod scheduler;

pub use beams::{beam_gains, complex_normal, compute_sinr, generate_beams, inner, BeamMatrix};
pub use feedback::{apply_feedback, FeedbackReport, SinrTable};
pub use run::{run_drops, DropRecord, DropSimulator, SimulationEstimate, BATCHES};
pub use scheduler::{
    calibrate_empirical_cdf, sample_report_variable, scheme_law_kind, DropOutcome, EmpiricalCdf, EmpiricalCdfs, Scheduler,
    SlotOutcome, MIN_CALIBRATION_DROPS,
};
