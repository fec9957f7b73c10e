//! Per-symbol adaptive receivers.
//!
//! All filters share the convention `z = w^H r` for the receiver output and
//! `e = b - w^H r` for the a priori error. The set-membership variants only
//! move `w` when `|e|` exceeds the error bound handed to
//! [`AdaptiveFilter::update`]; the baselines ignore the bound and update on
//! every symbol.

mod baseline;
mod beacon;
mod sm_ap;
mod sm_nlms;

pub use baseline::{ap_update, nlms_update, Ap, Nlms, Rls};
pub use beacon::{beacon_update, Beacon, BeaconState};
pub use sm_ap::{sm_ap_update, ApState, SmAp};
pub use sm_nlms::{sm_nlms_update, SmNlms};

use num_complex::Complex64;

use crate::{CVector, Error, Result};

/// Linear receiver weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverWeights {
    pub w: CVector,
}

impl ReceiverWeights {
    pub fn new(w: CVector) -> Self {
        Self { w }
    }

    pub fn zeros(len: usize) -> Self {
        Self { w: CVector::zeros(len) }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Receiver output `w^H r`.
    pub fn output(&self, r: &CVector) -> Complex64 {
        self.w.dotc(r)
    }

    /// A priori error `b - w^H r`.
    pub fn error(&self, r: &CVector, b: Complex64) -> Complex64 {
        b - self.output(r)
    }

    pub fn norm_squared(&self) -> f64 {
        self.w.norm_squared()
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.w.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::StateCorruption("non-finite receiver weights"))
        }
    }
}

/// What a single update did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    pub updated: bool,
    pub prior_error: Complex64,
    /// Step size (NLMS/AP families), Lagrange multiplier (BEACON) or 1 for
    /// RLS. Zero exactly when no update happened.
    pub step_or_lambda: f64,
}

impl UpdateOutcome {
    pub(crate) fn skipped(prior_error: Complex64) -> Self {
        Self { updated: false, prior_error, step_or_lambda: 0.0 }
    }
}

/// Hard BPSK decision plus the soft receiver output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub symbol: f64,
    pub soft: Complex64,
}

/// `sgn(Re(w^H r))`, with a zero real part mapped to `+1`.
pub fn detect(weights: &ReceiverWeights, r: &CVector) -> Decision {
    let soft = weights.output(r);
    let symbol = if soft.re < 0.0 { -1.0 } else { 1.0 };
    Decision { symbol, soft }
}

pub(crate) fn check_bound(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        Err(Error::InvalidBound(gamma))
    } else {
        Ok(())
    }
}

/// Common interface for the receivers driven by the harness.
pub trait AdaptiveFilter: Send {
    fn weights(&self) -> &ReceiverWeights;

    /// Process one observation with desired symbol `b`. Baselines ignore
    /// `gamma`.
    fn update(&mut self, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome>;

    fn detect(&self, r: &CVector) -> Decision {
        detect(self.weights(), r)
    }
}
