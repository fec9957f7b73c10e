//! Closed-form checks for the estimators and bound recursions: step-size
//! stability limits and mean-square error recursions.

use nalgebra::{DMatrix, SymmetricEigen};
use std::fmt;

use crate::cdma::ConvolutionMatrix;
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Stability limits for the channel, amplitude and bound recursions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `2 / (sigma_b^2 sigma_A^2 lambda_max)`.
    pub mu_h_max: f64,
    /// `2 / (sigma_b^2 ||C h||^2)`.
    pub mu_a_max: f64,
    /// Open interval of forgetting factors for which `gamma` converges.
    pub beta_range: (f64, f64),
    /// Largest eigenvalue of `C^H C`.
    pub lambda_max: f64,
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda_max(C^H C) = {:.10}", self.lambda_max)?;
        writeln!(f, "mu_h range        = (0, {:.10})", self.mu_h_max)?;
        writeln!(f, "mu_A range        = (0, {:.10})", self.mu_a_max)?;
        write!(f, "beta range        = ({}, {})", self.beta_range.0, self.beta_range.1)
    }
}

/// Eigenvalues of the real symmetric `C^H C`, ascending.
pub fn gram_eigenvalues(conv: &ConvolutionMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(conv.gram()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn step_bounds(conv: &ConvolutionMatrix, sigma_b2: f64, sigma_a2: f64, h_hat: &CVector) -> Result<StabilityReport> {
    if conv.entries().iter().all(|&c| c == 0.0) {
        return Err(Error::DegenerateInput("zero spreading code"));
    }
    if !(sigma_b2 > 0.0) || !(sigma_a2 > 0.0) {
        return Err(Error::Config(format!("symbol power {sigma_b2} and amplitude power {sigma_a2} must be positive")));
    }
    let lambda_max = *gram_eigenvalues(conv).last().expect("at least one tap");
    let signature_energy = conv.apply(h_hat).norm_squared();
    if signature_energy == 0.0 {
        return Err(Error::DegenerateEstimate("zero channel estimate"));
    }
    Ok(StabilityReport {
        mu_h_max: 2.0 / (sigma_b2 * sigma_a2 * lambda_max),
        mu_a_max: 2.0 / (sigma_b2 * signature_energy),
        beta_range: (0.0, 2.0),
        lambda_max,
    })
}

/// How the excitation term of the channel-error covariance recursion is
/// modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationModel {
    /// The optimum residual is white over the `M` chips, so the excitation
    /// is `mu^2 sigma_A^2 sigma_b^2 (MSE_min / M) C^H C`.
    WhiteResidual,
    /// Scalar excitation `mu^2 sigma_A^2 sigma_b^2 lambda_max^2 MSE_min I`.
    SpectralNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRecursion {
    pub mu_h: f64,
    pub sigma_a2: f64,
    pub sigma_b2: f64,
    /// `E||e_opt||^2` summed over the `M` chips.
    pub mse_min: f64,
    pub excitation: ExcitationModel,
}

impl ChannelRecursion {
    fn gain(&self) -> f64 {
        self.mu_h * self.sigma_a2 * self.sigma_b2
    }

    fn excitation_matrix(&self, conv: &ConvolutionMatrix) -> DMatrix<f64> {
        let g = conv.gram();
        let base = self.mu_h * self.gain();
        match self.excitation {
            ExcitationModel::WhiteResidual => g * (base * self.mse_min / conv.rows() as f64),
            ExcitationModel::SpectralNorm => {
                let lmax = SymmetricEigen::new(g.clone()).eigenvalues.max();
                DMatrix::identity(g.nrows(), g.nrows()) * (base * lmax * lmax * self.mse_min)
            }
        }
    }
}

/// Iterate `K <- B K B + Q` with `B = I - mu sigma_A^2 sigma_b^2 C^H C` and
/// return `tr K` for steps `0..=n_steps`.
pub fn predict_channel_covariance(
    k0: &CMatrix,
    conv: &ConvolutionMatrix,
    params: &ChannelRecursion,
    n_steps: usize,
) -> Result<Vec<f64>> {
    let l = conv.taps();
    if k0.shape() != (l, l) {
        return Err(Error::Dimension(format!("K0 is {:?}, expected {l}x{l}", k0.shape())));
    }
    let g = conv.gram();
    let b = (DMatrix::<f64>::identity(l, l) - g * params.gain()).map(|v| Complex64::new(v, 0.0));
    let q = params.excitation_matrix(conv).map(|v| Complex64::new(v, 0.0));
    let mut k = k0.clone();
    let mut traces = Vec::with_capacity(n_steps + 1);
    traces.push(k.trace().re);
    for _ in 0..n_steps {
        k = &b * &k * &b + &q;
        traces.push(k.trace().re);
    }
    Ok(traces)
}

/// Trace of the fixed point of the covariance recursion, from the shared
/// eigenbasis of `C^H C`, `B` and the excitation.
pub fn channel_covariance_fixed_point(conv: &ConvolutionMatrix, params: &ChannelRecursion) -> Result<f64> {
    let eig = SymmetricEigen::new(conv.gram());
    let q = params.excitation_matrix(conv);
    let mut total = 0.0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let ratio = 1.0 - params.gain() * lambda;
        if ratio.abs() >= 1.0 {
            return Err(Error::Config(format!("mu_h = {} is outside the stable range", params.mu_h)));
        }
        let v = eig.eigenvectors.column(i);
        let qi = (v.transpose() * &q * v)[(0, 0)];
        total += qi / (1.0 - ratio * ratio);
    }
    Ok(total)
}

/// Amplitude MSE recursion
/// `K <- (1 - mu_A sigma_b^2 E)^2 K + mu_A^2 sigma_b^2 E MSE_A,min` with
/// `E = ||h^H C^H||^2` evaluated at the supplied channel.
pub fn predict_amplitude_mse(
    k0: f64,
    mu_a: f64,
    sigma_b2: f64,
    signature_energy: f64,
    mse_a_min: f64,
    n_steps: usize,
) -> Vec<f64> {
    let ratio = 1.0 - mu_a * sigma_b2 * signature_energy;
    let drive = mu_a * mu_a * sigma_b2 * signature_energy * mse_a_min;
    scalar_recursion(k0, ratio * ratio, drive, n_steps)
}

/// MSE of the bound recursion `gamma <- (1 - beta) gamma + beta Po`:
/// `K <- (1 - beta)^2 K + beta^2 e_opt2`.
pub fn predict_gamma_mse(k0: f64, beta: f64, e_opt2: f64, n_steps: usize) -> Vec<f64> {
    scalar_recursion(k0, (1.0 - beta).powi(2), beta * beta * e_opt2, n_steps)
}

/// `beta e_opt2 / (2 - beta)`, defined for `beta` in `(0, 2)`.
pub fn gamma_mse_fixed_point(beta: f64, e_opt2: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::Config(format!("beta = {beta} outside (0, 2)")));
    }
    Ok(beta * e_opt2 / (2.0 - beta))
}

fn scalar_recursion(k0: f64, ratio: f64, drive: f64, n_steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut k = k0;
    out.push(k);
    for _ in 0..n_steps {
        k = ratio * k + drive;
        out.push(k);
    }
    out
}
