use std::collections::VecDeque;

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use super::{check_bound, AdaptiveFilter, ReceiverWeights, UpdateOutcome};
use crate::{CMatrix, CVector, Error, Result};

/// Largest condition number of `Y^H Y + delta I` accepted before the window
/// is declared ill-conditioned.
pub const MAX_CONDITION: f64 = 1e12;

/// Sliding window of the last `P` observations (newest first) used by the
/// affine-projection filters.
#[derive(Debug, Clone)]
pub struct ApState {
    columns: VecDeque<CVector>,
    desired: VecDeque<Complex64>,
    order: usize,
    pub delta: f64,
}

impl ApState {
    pub fn new(order: usize, delta: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("projection order must be at least 1".into()));
        }
        if !(delta >= 0.0) {
            return Err(Error::Config(format!("regularisation {delta} must be non-negative")));
        }
        Ok(Self { columns: VecDeque::with_capacity(order), desired: VecDeque::with_capacity(order), order, delta })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of filled columns. Before warm-up the missing columns act as
    /// zero vectors and do not contribute to the update.
    pub fn filled(&self) -> usize {
        self.columns.len()
    }

    pub fn push(&mut self, r: CVector, b: Complex64) {
        if self.columns.len() == self.order {
            self.columns.pop_back();
            self.desired.pop_back();
        }
        self.columns.push_front(r);
        self.desired.push_front(b);
    }

    pub fn newest(&self) -> Option<(&CVector, Complex64)> {
        self.columns.front().map(|r| (r, self.desired[0]))
    }

    /// Observation matrix `Y = [r[i] ... r[i-p+1]]`.
    pub fn observation_matrix(&self) -> CMatrix {
        let m = self.columns.front().map_or(0, |c| c.len());
        CMatrix::from_fn(m, self.columns.len(), |i, j| self.columns[j][i])
    }

    /// Desired outputs, newest first.
    pub fn desired(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.desired.iter().copied()
    }

    /// Solve `(Y^H Y + delta I) t = rhs`.
    pub(crate) fn solve_normal(&self, y: &CMatrix, rhs: &CVector) -> Result<CVector> {
        let p = y.ncols();
        let mut gram = y.adjoint() * y;
        for i in 0..p {
            gram[(i, i)] += Complex64::new(self.delta, 0.0);
        }
        if p > 1 {
            let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            if cond > MAX_CONDITION {
                return Err(Error::IllConditioned(cond));
            }
        } else if gram[(0, 0)].re <= 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        let chol = Cholesky::new(gram).ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(chol.solve(rhs))
    }
}

/// Set-membership affine-projection step on a window that already holds the
/// current observation. Only the newest error is moved onto the bound; the
/// older a posteriori errors are kept as they are:
/// `w += (1 - gamma/|e|) Y (Y^H Y + delta I)^{-1} e^* u`.
pub fn sm_ap_update(
    weights: &mut ReceiverWeights,
    state: &ApState,
    b: Complex64,
    gamma: f64,
) -> Result<UpdateOutcome> {
    check_bound(gamma)?;
    let (r, _) = state.newest().ok_or(Error::DegenerateInput("empty projection window"))?;
    let e = weights.error(r, b);
    let mag = e.norm();
    if mag <= gamma {
        return Ok(UpdateOutcome::skipped(e));
    }
    let mu = 1.0 - gamma / mag;
    let y = state.observation_matrix();
    let mut rhs = CVector::zeros(y.ncols());
    rhs[0] = e.conj() * mu;
    let t = state.solve_normal(&y, &rhs)?;
    weights.w += y * t;
    weights.ensure_finite()?;
    Ok(UpdateOutcome { updated: true, prior_error: e, step_or_lambda: mu })
}

#[derive(Debug, Clone)]
pub struct SmAp {
    weights: ReceiverWeights,
    state: ApState,
}

impl SmAp {
    pub fn new(initial: ReceiverWeights, order: usize, delta: f64) -> Result<Self> {
        Ok(Self { weights: initial, state: ApState::new(order, delta)? })
    }

    pub fn state(&self) -> &ApState {
        &self.state
    }
}

impl AdaptiveFilter for SmAp {
    fn weights(&self) -> &ReceiverWeights {
        &self.weights
    }

    fn update(&mut self, r: &CVector, b: Complex64, gamma: f64) -> Result<UpdateOutcome> {
        self.state.push(r.clone(), b);
        sm_ap_update(&mut self.weights, &self.state, b, gamma)
    }
}
