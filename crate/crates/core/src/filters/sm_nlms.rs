use num_complex::Complex64;

use super::{check_bound, AdaptiveFilter, ReceiverWeights, UpdateOutcome};
use crate::{CVector, Error, Result};

/// Set-membership NLMS step. When `|e| > gamma` the weights are projected so
/// that the a posteriori error has magnitude exactly `gamma`:
/// `w += (1 - gamma/|e|) / (r^H r) * e^* r`.
pub fn sm_nlms_update(weights: &mut ReceiverWeights, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome> {
    check_bound(gamma)?;
    let e = weights.error(r, b);
    let mag = e.norm();
    if mag <= gamma {
        return Ok(UpdateOutcome::skipped(e));
    }
    let energy = r.norm_squared();
    if energy == 0.0 {
        return Err(Error::DegenerateInput("zero observation vector"));
    }
    let mu = (1.0 - gamma / mag) / energy;
    weights.w.axpy(e.conj() * mu, r, Complex64::new(1.0, 0.0));
    weights.ensure_finite()?;
    Ok(UpdateOutcome { updated: true, prior_error: e, step_or_lambda: mu })
}

#[derive(Debug, Clone)]
pub struct SmNlms {
    weights: ReceiverWeights,
}

impl SmNlms {
    pub fn new(initial: ReceiverWeights) -> Self {
        Self { weights: initial }
    }
}

impl AdaptiveFilter for SmNlms {
    fn weights(&self) -> &ReceiverWeights {
        &self.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome> {
        sm_nlms_update(&mut self.weights, r, b, gamma)
    }
}
