//! Seeded Monte-Carlo experiments.
//!
//! A run draws one channel, one set of interferer powers and one packet of
//! symbols and feeds the same received vectors to every selected receiver.
//! Runs are independent ChaCha streams of the master seed, executed in
//! parallel and merged in run order, so results do not depend on the
//! thread count.

mod config;
mod run;

pub use config::{AlgorithmSpec, ExperimentConfig, Family, Scenario, SinrEstimator};
pub use run::{run_scenario, simulate_run, LaneResult, LaneTrace, PointParams, PointResult, RunArtifact, RunOutput};

/// Version string written into every manifest.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
