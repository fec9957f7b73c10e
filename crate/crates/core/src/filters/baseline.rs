//! Non-selective baselines: NLMS, affine projection and exponentially
//! weighted RLS. They update on every symbol.

use num_complex::Complex64;

use super::beacon::hermitize;
use super::{AdaptiveFilter, ApState, ReceiverWeights, UpdateOutcome};
use crate::{CMatrix, CVector, Error, Result};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `w += mu e^* r / (eps + r^H r)`.
pub fn nlms_update(
    weights: &mut ReceiverWeights,
    r: &CVector,
    b: Complex64,
    step: f64,
    eps: f64,
) -> Result<UpdateOutcome> {
    let e = weights.error(r, b);
    let energy = eps + r.norm_squared();
    if energy <= 0.0 {
        return Err(Error::DegenerateInput("zero observation vector"));
    }
    let mu = step / energy;
    weights.w.axpy(e.conj() * mu, r, ONE);
    weights.ensure_finite()?;
    Ok(UpdateOutcome { updated: true, prior_error: e, step_or_lambda: mu })
}

/// `w += mu Y (Y^H Y + delta I)^{-1} (b^* - Y^H w)` on a window that holds
/// the current observation.
pub fn ap_update(weights: &mut ReceiverWeights, state: &ApState, step: f64) -> Result<UpdateOutcome> {
    let (r, b) = state.newest().ok_or(Error::DegenerateInput("empty projection window"))?;
    let e = weights.error(r, b);
    let y = state.observation_matrix();
    let errors = CVector::from_iterator(
        y.ncols(),
        state.desired().enumerate().map(|(j, bj)| bj.conj() - y.column(j).dotc(&weights.w)),
    );
    let t = state.solve_normal(&y, &errors)?;
    weights.w.axpy(Complex64::new(step, 0.0), &(y * t), ONE);
    weights.ensure_finite()?;
    Ok(UpdateOutcome { updated: true, prior_error: e, step_or_lambda: step })
}

#[derive(Debug, Clone)]
pub struct Nlms {
    weights: ReceiverWeights,
    step: f64,
    eps: f64,
}

impl Nlms {
    pub fn new(initial: ReceiverWeights, step: f64, eps: f64) -> Result<Self> {
        if !(step > 0.0) || !(eps >= 0.0) {
            return Err(Error::Config(format!("NLMS step {step} / regularisation {eps}")));
        }
        Ok(Self { weights: initial, step, eps })
    }
}

impl AdaptiveFilter for Nlms {
    fn weights(&self) -> &ReceiverWeights {
        &self.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, _gamma: f64) -> Result<UpdateOutcome> {
        nlms_update(&mut self.weights, r, b, self.step, self.eps)
    }
}

#[derive(Debug, Clone)]
pub struct Ap {
    weights: ReceiverWeights,
    state: ApState,
    step: f64,
}

impl Ap {
    pub fn new(initial: ReceiverWeights, order: usize, step: f64, delta: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Config(format!("AP step {step}")));
        }
        Ok(Self { weights: initial, state: ApState::new(order, delta)?, step })
    }
}

impl AdaptiveFilter for Ap {
    fn weights(&self) -> &ReceiverWeights {
        &self.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, _gamma: f64) -> Result<UpdateOutcome> {
        self.state.push(r.clone(), b);
        ap_update(&mut self.weights, &self.state, self.step)
    }
}

/// Exponentially weighted RLS with inverse-correlation matrix `P`.
#[derive(Debug, Clone)]
pub struct Rls {
    weights: ReceiverWeights,
    p: CMatrix,
    forgetting: f64,
}

impl Rls {
    /// `P[0] = I / delta`.
    pub fn new(initial: ReceiverWeights, forgetting: f64, delta: f64) -> Result<Self> {
        if !(forgetting > 0.0 && forgetting <= 1.0) || !(delta > 0.0) {
            return Err(Error::Config(format!("RLS forgetting {forgetting} / delta {delta}")));
        }
        let m = initial.len();
        let p = CMatrix::identity(m, m) * Complex64::new(1.0 / delta, 0.0);
        Ok(Self { weights: initial, p, forgetting })
    }

    pub fn inverse_correlation(&self) -> &CMatrix {
        &self.p
    }
}

impl AdaptiveFilter for Rls {
    fn weights(&self) -> &ReceiverWeights {
        &self.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, _gamma: f64) -> Result<UpdateOutcome> {
        let xi = self.weights.error(r, b);
        let pr = &self.p * r;
        let denom = self.forgetting + r.dotc(&pr).re;
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::StateCorruption("RLS gain denominator is not positive"));
        }
        let gain = &pr / Complex64::new(denom, 0.0);
        self.weights.w.axpy(xi.conj(), &gain, ONE);
        // P = (P - k (P r)^H) / lambda
        self.p.gerc(Complex64::new(-1.0, 0.0), &gain, &pr, ONE);
        self.p /= Complex64::new(self.forgetting, 0.0);
        hermitize(&mut self.p);
        self.weights.ensure_finite()?;
        Ok(UpdateOutcome { updated: true, prior_error: xi, step_or_lambda: 1.0 })
    }
}
