//! SINR, BER and update-rate measurement.

use crate::cdma::SymbolRecord;
use crate::filters::{ReceiverWeights, UpdateOutcome};
use crate::{CMatrix, Complex64, Error, Result};

/// Sample estimates of the desired-signal and interference-plus-noise
/// correlation matrices.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    sum_s: CMatrix,
    sum_i: CMatrix,
    count: usize,
}

impl CovarianceEstimate {
    pub fn new(m: usize) -> Self {
        Self { sum_s: CMatrix::zeros(m, m), sum_i: CMatrix::zeros(m, m), count: 0 }
    }

    pub fn add(&mut self, record: &SymbolRecord) {
        let one = Complex64::new(1.0, 0.0);
        let s = &record.desired_component;
        let v = &record.interference_component + &record.noise_component;
        self.sum_s.gerc(one, s, s, one);
        self.sum_i.gerc(one, &v, &v, one);
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `R_s` and `R_I` as sample averages.
    pub fn matrices(&self) -> (CMatrix, CMatrix) {
        let n = Complex64::new(self.count.max(1) as f64, 0.0);
        (&self.sum_s / n, &self.sum_i / n)
    }

    pub fn sinr(&self, w: &ReceiverWeights) -> Result<f64> {
        let (rs, ri) = self.matrices();
        sinr_at(w, &rs, &ri)
    }
}

/// `(w^H R_s w) / (w^H R_I w)` as a linear ratio.
pub fn sinr_at(w: &ReceiverWeights, r_s: &CMatrix, r_i: &CMatrix) -> Result<f64> {
    let num = w.w.dotc(&(r_s * &w.w)).re;
    let den = w.w.dotc(&(r_i * &w.w)).re;
    sinr_ratio(num, den)
}

pub(crate) fn sinr_ratio(num: f64, den: f64) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(num / den)
    } else {
        Err(Error::UndefinedSinr(den))
    }
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Fraction of wrong decisions after the first `skip_training` symbols.
pub fn ber(decisions: &[f64], truth: &[f64], skip_training: usize) -> Result<f64> {
    if decisions.len() != truth.len() {
        return Err(Error::Dimension(format!("{} decisions for {} symbols", decisions.len(), truth.len())));
    }
    let n = decisions.len().saturating_sub(skip_training);
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    let errors = decisions[skip_training..].iter().zip(&truth[skip_training..]).filter(|(d, t)| d != t).count();
    Ok(errors as f64 / n as f64)
}

/// Fraction of symbols on which the filter updated.
pub fn update_rate(outcomes: &[UpdateOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(outcomes.iter().filter(|o| o.updated).count() as f64 / outcomes.len() as f64)
}

/// Per-iteration sums across Monte-Carlo runs for one receiver.
///
/// Sums are plain `f64` additions, so merging accumulators in a fixed order
/// gives bit-identical results.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAccumulator {
    /// `sum over runs of w^H R_s w` at each iteration.
    pub signal: Vec<f64>,
    /// `sum over runs of w^H R_I w` at each iteration.
    pub interference: Vec<f64>,
    /// Number of runs that updated at each iteration.
    pub updates: Vec<u64>,
    /// Tracked interference power `v_hat`, summed over runs.
    pub v_hat: Vec<f64>,
    /// Genie MAI + ISI + noise power at the RAKE output, summed over runs.
    pub genie: Vec<f64>,
    pub bit_errors: u64,
    pub decided_bits: u64,
    pub runs: u64,
}

impl MetricAccumulator {
    pub fn new(iterations: usize) -> Self {
        Self {
            signal: vec![0.0; iterations],
            interference: vec![0.0; iterations],
            updates: vec![0; iterations],
            v_hat: vec![0.0; iterations],
            genie: vec![0.0; iterations],
            bit_errors: 0,
            decided_bits: 0,
            runs: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.signal.len()
    }

    pub fn merge(&mut self, other: &MetricAccumulator) -> Result<()> {
        if other.iterations() != self.iterations() {
            return Err(Error::Dimension(format!("merging {} into {} iterations", other.iterations(), self.iterations())));
        }
        let add = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.signal, &other.signal);
        add(&mut self.interference, &other.interference);
        add(&mut self.v_hat, &other.v_hat);
        add(&mut self.genie, &other.genie);
        self.updates.iter_mut().zip(&other.updates).for_each(|(x, y)| *x += y);
        self.bit_errors += other.bit_errors;
        self.decided_bits += other.decided_bits;
        self.runs += other.runs;
        Ok(())
    }

    /// Run-averaged SINR in dB at `iteration`.
    pub fn sinr_db(&self, iteration: usize) -> Result<f64> {
        sinr_ratio(self.signal[iteration], self.interference[iteration]).map(to_db)
    }

    pub fn ber(&self) -> Result<f64> {
        if self.decided_bits == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok(self.bit_errors as f64 / self.decided_bits as f64)
    }

    /// Update rate over all runs and iterations.
    pub fn update_rate(&self) -> f64 {
        let total: u64 = self.updates.iter().sum();
        let slots = self.runs as f64 * self.iterations() as f64;
        if slots == 0.0 {
            0.0
        } else {
            total as f64 / slots
        }
    }

    pub fn mean_v_hat(&self, iteration: usize) -> f64 {
        self.v_hat[iteration] / self.runs.max(1) as f64
    }

    pub fn mean_genie(&self, iteration: usize) -> f64 {
        self.genie[iteration] / self.runs.max(1) as f64
    }
}
