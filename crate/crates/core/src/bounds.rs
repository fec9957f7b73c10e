//! Error-bound controllers for the set-membership receivers.
//!
//! All time-varying bounds share the scalar relaxation
//! `gamma <- (1 - beta) gamma + beta Po`, with the drive `Po` set by the
//! controller:
//!
//! * PDB: `Po = sqrt(alpha ||w||^2 sigma_v^2)`, the spread of `w^H n`.
//! * PIDB: `Po = sqrt(tau v^2) + sqrt(alpha ||w||^2 sigma_v^2)`, where `v` is
//!   the tracked MAI + ISI + noise power at the RAKE output.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::filters::ReceiverWeights;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Fixed,
    Pdb,
    Pidb,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Fixed => "fixed",
            BoundKind::Pdb => "pdb",
            BoundKind::Pidb => "pidb",
        })
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(BoundKind::Fixed),
            "pdb" => Ok(BoundKind::Pdb),
            "pidb" => Ok(BoundKind::Pidb),
            other => Err(Error::Config(format!("unknown bound kind `{other}`"))),
        }
    }
}

/// One step of `x <- (1 - beta) x + beta drive`.
pub fn relax(current: f64, drive: f64, beta: f64) -> f64 {
    (1.0 - beta) * current + beta * drive
}

/// Current bound, tracked interference power and tuning constants.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub kind: BoundKind,
    pub gamma: f64,
    pub v_hat: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    /// Noise power at the receiver, assumed known.
    pub sigma2_v: f64,
}

impl BoundState {
    /// A bound that stays at `gamma0`.
    pub fn fixed_bound(gamma0: f64) -> Result<Self> {
        if !(gamma0 >= 0.0) {
            return Err(Error::InvalidBound(gamma0));
        }
        Ok(Self { kind: BoundKind::Fixed, gamma: gamma0, v_hat: 0.0, alpha: 0.0, beta: 0.0, tau: 0.0, sigma2_v: 0.0 })
    }

    /// A time-varying bound started at `gamma0` with the tracked
    /// interference power started at the noise floor `sigma2_v`.
    pub fn time_varying(kind: BoundKind, gamma0: f64, alpha: f64, beta: f64, tau: f64, sigma2_v: f64) -> Result<Self> {
        if !(gamma0 >= 0.0) {
            return Err(Error::InvalidBound(gamma0));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config(format!("forgetting factor beta = {beta} must lie in (0, 1)")));
        }
        if !(alpha > 0.0) || !(tau >= 0.0) || !(sigma2_v >= 0.0) {
            return Err(Error::Config(format!("alpha = {alpha}, tau = {tau}, sigma2 = {sigma2_v}")));
        }
        Ok(Self { kind, gamma: gamma0, v_hat: sigma2_v, alpha, beta, tau, sigma2_v })
    }

    /// `sqrt(alpha ||w||^2 sigma_v^2)`.
    pub fn parameter_term(&self, w: &ReceiverWeights) -> f64 {
        (self.alpha * w.norm_squared() * self.sigma2_v).sqrt()
    }

    /// PDB recursion.
    pub fn pdb_step(&mut self, w: &ReceiverWeights) {
        self.gamma = relax(self.gamma, self.parameter_term(w), self.beta);
    }

    /// `v <- (1 - beta) v + beta |d|^2`.
    pub fn interference_track_step(&mut self, d: Complex64) {
        self.v_hat = relax(self.v_hat, d.norm_sqr(), self.beta);
    }

    /// PIDB recursion; expects the tracker to have seen the current symbol.
    pub fn pidb_step(&mut self, w: &ReceiverWeights) {
        let drive = (self.tau * self.v_hat * self.v_hat).sqrt() + self.parameter_term(w);
        self.gamma = relax(self.gamma, drive, self.beta);
    }

    /// Per-symbol controller update: track `d` (when the controller has a
    /// tracker) and move the bound according to its kind.
    pub fn step(&mut self, w: &ReceiverWeights, d: Complex64) {
        match self.kind {
            BoundKind::Fixed => {}
            BoundKind::Pdb => {
                self.interference_track_step(d);
                self.pdb_step(w);
            }
            BoundKind::Pidb => {
                self.interference_track_step(d);
                self.pidb_step(w);
            }
        }
    }
}
