//! Set-membership adaptive receivers with time-varying error bounds for
//! downlink DS-CDMA.
//!
//! The crate is organised bottom-up:
//!
//! * [`cdma`] synthesizes the received chip vectors (Gold codes, Clarke
//!   fading, multipath convolution, MAI/ISI/noise decomposition).
//! * [`filters`] holds the data-selective receivers (SM-NLMS, SM-AP,
//!   BEACON) and the always-updating baselines (NLMS, AP, RLS).
//! * [`bounds`] drives the error bound: fixed, parameter dependent (PDB) or
//!   parameter and interference dependent (PIDB).
//! * [`estimators`] is the RAKE-based interference estimation pipeline
//!   feeding the PIDB controller.
//! * [`analysis`] provides step-size bounds and MSE recursions used to
//!   cross-check simulations.
//! * [`metrics`] and [`harness`] measure SINR, BER and update rate over
//!   seeded Monte-Carlo runs and write CSV artifacts.

pub mod analysis;
pub mod bounds;
pub mod cdma;
pub mod error;
pub mod estimators;
pub mod export;
pub mod filters;
pub mod harness;
pub mod metrics;

pub use num_complex::Complex64;

pub use error::{Error, Result};

/// Complex column vector used for chip-rate observations and weights.
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

pub use analysis::StabilityReport;
pub use bounds::{BoundKind, BoundState};
pub use cdma::{ChannelState, ConvolutionMatrix, Downlink, SpreadingCode, SymbolRecord};
pub use estimators::EstimatorState;
pub use filters::{detect, Decision, ReceiverWeights, UpdateOutcome};
pub use harness::{ExperimentConfig, RunArtifact, Scenario};
pub use metrics::MetricAccumulator;
