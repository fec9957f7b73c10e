//! Interference estimation pipeline: stochastic-gradient channel and
//! amplitude estimators, a normalised RAKE receiver and the subtraction of
//! the detected desired symbol from the RAKE output.
//!
//! Both estimators descend the cost `E||A b C h - r||^2`. The channel step
//! keeps the amplitude estimate inside the residual,
//! `h <- h - mu_h A C^H b^* (A b C h - r)`, so that the error dynamics follow
//! the covariance recursion in [`crate::analysis`].

use num_complex::Complex64;

use crate::cdma::ConvolutionMatrix;
use crate::{CVector, Error, Result};

#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub h_hat: CVector,
    pub a_hat: f64,
    /// `C h_hat`, the estimated effective signature.
    signature: CVector,
    /// RAKE vector `C h_hat / ||C h_hat||^2`.
    f_rake: CVector,
    pub mu_h: f64,
    pub mu_a: f64,
}

impl EstimatorState {
    /// Starts from a first-path-only channel `[1, 0, ..., 0]` and unit
    /// amplitude.
    pub fn new(conv: &ConvolutionMatrix, mu_h: f64, mu_a: f64) -> Result<Self> {
        let mut h = CVector::zeros(conv.taps());
        h[0] = Complex64::new(1.0, 0.0);
        Self::with_estimates(conv, h, 1.0, mu_h, mu_a)
    }

    pub fn with_estimates(conv: &ConvolutionMatrix, h_hat: CVector, a_hat: f64, mu_h: f64, mu_a: f64) -> Result<Self> {
        if !(mu_h > 0.0) || !(mu_a > 0.0) {
            return Err(Error::Config(format!("estimator steps mu_h = {mu_h}, mu_A = {mu_a} must be positive")));
        }
        if h_hat.len() != conv.taps() {
            return Err(Error::Dimension(format!("{} channel taps for a {}-tap matrix", h_hat.len(), conv.taps())));
        }
        let mut s = Self {
            h_hat,
            a_hat: a_hat.max(0.0),
            signature: CVector::zeros(conv.rows()),
            f_rake: CVector::zeros(conv.rows()),
            mu_h,
            mu_a,
        };
        s.refresh_rake(conv);
        Ok(s)
    }

    fn refresh_rake(&mut self, conv: &ConvolutionMatrix) {
        self.signature = conv.apply(&self.h_hat);
        let energy = self.signature.norm_squared();
        self.f_rake = if energy > 0.0 { &self.signature / Complex64::new(energy, 0.0) } else { CVector::zeros(self.signature.len()) };
    }

    pub fn f_rake(&self) -> &CVector {
        &self.f_rake
    }

    /// `C h_hat`.
    pub fn signature(&self) -> &CVector {
        &self.signature
    }

    /// Model residual `A_hat b C h_hat - r`.
    pub fn residual(&self, b: Complex64, r: &CVector) -> CVector {
        &self.signature * (b * self.a_hat) - r
    }

    /// SG channel step.
    pub fn channel_sg_step(&mut self, conv: &ConvolutionMatrix, b: Complex64, r: &CVector) {
        let residual = self.residual(b, r);
        self.apply_channel_step(conv, b, &residual);
        self.refresh_rake(conv);
    }

    /// SG amplitude step. The amplitude is real, so the real part of the
    /// gradient is used and the estimate is clamped at zero.
    pub fn amplitude_sg_step(&mut self, b: Complex64, r: &CVector) {
        let residual = self.residual(b, r);
        self.apply_amplitude_step(b, &residual);
    }

    /// Both steps evaluated at the current estimates.
    pub fn joint_sg_step(&mut self, conv: &ConvolutionMatrix, b: Complex64, r: &CVector) {
        let residual = self.residual(b, r);
        let g = self.amplitude_gradient(b, &residual);
        // the channel step uses the amplitude from before this symbol
        self.apply_channel_step(conv, b, &residual);
        self.a_hat = (self.a_hat - self.mu_a * g).max(0.0);
        self.refresh_rake(conv);
    }

    fn apply_channel_step(&mut self, conv: &ConvolutionMatrix, b: Complex64, residual: &CVector) {
        let grad = conv.adjoint_apply(residual);
        let scale = Complex64::new(-self.mu_h * self.a_hat, 0.0) * b.conj();
        self.h_hat.axpy(scale, &grad, Complex64::new(1.0, 0.0));
    }

    fn amplitude_gradient(&self, b: Complex64, residual: &CVector) -> f64 {
        (b.conj() * self.signature.dotc(residual)).re
    }

    fn apply_amplitude_step(&mut self, b: Complex64, residual: &CVector) {
        let g = self.amplitude_gradient(b, residual);
        self.a_hat = (self.a_hat - self.mu_a * g).max(0.0);
    }

    /// RAKE output `f^H r`, normalised so that `f^H C h_hat = 1`.
    pub fn rake_output(&self, r: &CVector) -> Result<Complex64> {
        if self.signature.norm_squared() == 0.0 {
            return Err(Error::DegenerateEstimate("zero RAKE vector"));
        }
        Ok(self.f_rake.dotc(r))
    }

    /// `d = x - A_hat b`, the RAKE output with the desired symbol removed.
    pub fn interference_sample(&self, x: Complex64, b_detected: Complex64) -> Complex64 {
        x - b_detected * self.a_hat
    }
}
