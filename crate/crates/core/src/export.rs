//! CSV tables and per-symbol traces.
//!
//! Every writer renders into a `String` first so that artifacts can be
//! compared byte for byte before they touch the disk.

use serde::Serialize;

use crate::analysis::StabilityReport;
use crate::cdma::SpreadingCode;
use crate::{CVector, Result};

fn render<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_with_header<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SinrRow {
    pub iteration: usize,
    pub algorithm: String,
    pub mean_sinr_db: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BerRow {
    pub x_value: f64,
    pub algorithm: String,
    pub ber: f64,
    pub ur: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InterferenceRow {
    pub iteration: usize,
    pub v_hat: f64,
    pub genie_power: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub update_rate: f64,
    pub ber: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FilterTraceRow {
    pub symbol: usize,
    pub prior_error_magnitude: f64,
    pub gamma: f64,
    pub updated: bool,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundTraceRow {
    pub symbol: usize,
    pub gamma: f64,
    pub v_hat: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EstimatorTraceRow {
    pub symbol: usize,
    pub channel_error: f64,
    pub a_hat: f64,
    pub interference_sample_power: f64,
    pub genie_power: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
struct ChannelTraceRow {
    symbol: usize,
    tap: usize,
    real: f64,
    imag: f64,
}

pub fn sinr_csv(rows: &[SinrRow]) -> Result<String> {
    render(rows)
}

pub fn ber_csv(rows: &[BerRow]) -> Result<String> {
    render(rows)
}

pub fn interference_csv(rows: &[InterferenceRow]) -> Result<String> {
    render(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    render(rows)
}

pub fn filter_trace_csv(rows: &[FilterTraceRow]) -> Result<String> {
    render(rows)
}

pub fn bound_trace_csv(rows: &[BoundTraceRow]) -> Result<String> {
    render(rows)
}

pub fn estimator_trace_csv(rows: &[EstimatorTraceRow]) -> Result<String> {
    render(rows)
}

/// One row per (symbol, tap) of the chip-spaced impulse responses.
pub fn channel_trace_csv(snapshots: &[CVector]) -> Result<String> {
    let rows = snapshots.iter().enumerate().flat_map(|(symbol, h)| {
        h.iter().enumerate().map(move |(tap, c)| ChannelTraceRow { symbol, tap, real: c.re, imag: c.im })
    });
    render(rows)
}

/// One row per code, chips as `1` / `-1`.
pub fn codes_csv(codes: &[SpreadingCode]) -> Result<String> {
    let n = codes.first().map_or(0, |c| c.len());
    let header: Vec<String> = std::iter::once("code".to_string()).chain((0..n).map(|i| format!("chip{i}"))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = codes.iter().map(|c| {
        let chips: Vec<i8> = c.chips.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect();
        (c.user_index, chips)
    });
    render_with_header(&header, rows)
}

pub fn stability_csv(report: &StabilityReport) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        lambda_max: f64,
        mu_h_max: f64,
        mu_a_max: f64,
        beta_min: f64,
        beta_max: f64,
    }
    render([Row {
        lambda_max: report.lambda_max,
        mu_h_max: report.mu_h_max,
        mu_a_max: report.mu_a_max,
        beta_min: report.beta_range.0,
        beta_max: report.beta_range.1,
    }])
}
