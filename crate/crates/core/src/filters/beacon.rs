use num_complex::Complex64;

use super::{check_bound, AdaptiveFilter, ReceiverWeights, UpdateOutcome};
use crate::{CMatrix, CVector, Error, Result};

/// Receiver weights and the Hermitian matrix `P` of the bounding ellipsoid.
#[derive(Debug, Clone)]
pub struct BeaconState {
    pub weights: ReceiverWeights,
    pub p: CMatrix,
}

impl BeaconState {
    /// `P[0] = I / epsilon`.
    pub fn new(initial: ReceiverWeights, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("BEACON epsilon {epsilon} must be positive")));
        }
        let m = initial.len();
        let p = CMatrix::identity(m, m) * Complex64::new(1.0 / epsilon, 0.0);
        Ok(Self { weights: initial, p })
    }

    /// Largest `|P - P^H|` entry.
    pub fn asymmetry(&self) -> f64 {
        let d = &self.p - self.p.adjoint();
        d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// BEACON step with the innovation check: with `xi = b - w^H r` and
/// `t = r^H P r`, the multiplier `lambda = (|xi|/gamma - 1) / t` is nonzero
/// only when `|xi| > gamma`, and then
/// `P -= lambda P r r^H P / (1 + lambda t)`, `w += lambda P r xi^*`.
pub fn beacon_update(state: &mut BeaconState, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome> {
    check_bound(gamma)?;
    let xi = state.weights.error(r, b);
    let mag = xi.norm();
    if mag <= gamma {
        return Ok(UpdateOutcome::skipped(xi));
    }
    if gamma == 0.0 {
        return Err(Error::InvalidBound(gamma));
    }
    let pr = &state.p * r;
    let t = r.dotc(&pr).re;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::StateCorruption("r^H P r is not positive"));
    }
    let lambda = (mag / gamma - 1.0) / t;
    let denom = 1.0 + lambda * t;
    state.p.gerc(Complex64::new(-lambda / denom, 0.0), &pr, &pr, Complex64::new(1.0, 0.0));
    // P[i] r = P[i-1] r / (1 + lambda t)
    let p_new_r = pr / Complex64::new(denom, 0.0);
    state.weights.w.axpy(xi.conj() * lambda, &p_new_r, Complex64::new(1.0, 0.0));
    hermitize(&mut state.p);
    state.weights.ensure_finite()?;
    Ok(UpdateOutcome { updated: true, prior_error: xi, step_or_lambda: lambda })
}

/// Replace `P` by `(P + P^H) / 2`.
pub(crate) fn hermitize(p: &mut CMatrix) {
    let n = p.nrows();
    for i in 0..n {
        p[(i, i)].im = 0.0;
        for j in i + 1..n {
            let avg = (p[(i, j)] + p[(j, i)].conj()) * 0.5;
            p[(i, j)] = avg;
            p[(j, i)] = avg.conj();
        }
    }
}

#[derive(Debug, Clone)]
pub struct Beacon {
    state: BeaconState,
}

impl Beacon {
    pub fn new(initial: ReceiverWeights, epsilon: f64) -> Result<Self> {
        Ok(Self { state: BeaconState::new(initial, epsilon)? })
    }

    pub fn state(&self) -> &BeaconState {
        &self.state
    }
}

impl AdaptiveFilter for Beacon {
    fn weights(&self) -> &ReceiverWeights {
        &self.state.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome> {
        beacon_update(&mut self.state, r, b, gamma)
    }
}
