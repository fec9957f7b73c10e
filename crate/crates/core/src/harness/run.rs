use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{AlgorithmSpec, ExperimentConfig, Family, Scenario, SinrEstimator};
use super::CODE_VERSION;
use crate::analysis::step_bounds;
use crate::bounds::{relax, BoundKind, BoundState};
use crate::cdma::{draw_delays, gold_family, noise_variance, ChannelState, Downlink, SymbolWindow};
use crate::estimators::EstimatorState;
use crate::export::{self, BerRow, BoundTraceRow, EstimatorTraceRow, FilterTraceRow, InterferenceRow, SinrRow, SummaryRow};
use crate::filters::{detect, AdaptiveFilter, Ap, Beacon, Nlms, ReceiverWeights, Rls, SmAp, SmNlms};
use crate::metrics::MetricAccumulator;
use crate::{CVector, Complex64, Error, Result};

/// Operating point of one sweep grid entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub users: usize,
    pub eb_n0_db: f64,
    pub fd_t: f64,
    /// Value reported in the `x_value` column.
    pub x_value: f64,
}

impl PointParams {
    pub fn noise_sigma2(&self, processing_gain: usize) -> f64 {
        noise_variance(processing_gain, 1.0, self.eb_n0_db)
    }
}

/// Per-symbol traces of one receiver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaneTrace {
    pub filter: Vec<FilterTraceRow>,
    pub bound: Vec<BoundTraceRow>,
    pub estimator: Vec<EstimatorTraceRow>,
}

/// Output of a single run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub lanes: Vec<MetricAccumulator>,
    /// Channel impulse responses and lane traces, when requested.
    pub trace: Option<(Vec<CVector>, Vec<LaneTrace>)>,
}

#[derive(Debug, Clone)]
pub struct LaneResult {
    pub algorithm: AlgorithmSpec,
    pub metrics: MetricAccumulator,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub params: PointParams,
    pub noise_sigma2: f64,
    pub fixed_gamma: f64,
    pub lanes: Vec<LaneResult>,
}

impl PointResult {
    pub fn lane(&self, algorithm: &str) -> Option<&MetricAccumulator> {
        let spec: AlgorithmSpec = algorithm.parse().ok()?;
        self.lanes.iter().find(|l| l.algorithm == spec).map(|l| &l.metrics)
    }
}

/// Everything a scenario produced: merged metrics and rendered files.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub config: ExperimentConfig,
    pub points: Vec<PointResult>,
    /// `(relative path, contents)`, manifest last.
    pub files: Vec<(String, String)>,
}

impl RunArtifact {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, contents)?;
        }
        Ok(())
    }
}

struct Lane {
    spec: AlgorithmSpec,
    filter: Box<dyn AdaptiveFilter>,
    bound: Option<BoundState>,
    /// Interference power tracked from `d`; kept for every receiver so the
    /// tracker can be studied with any detector.
    v_hat: f64,
    estimator: EstimatorState,
    metrics: MetricAccumulator,
    trace: Option<LaneTrace>,
}

/// `||w[0]||^2 = 1/N` for the RAKE start, so the automatic bound is
/// `sqrt(alpha sigma^2 / N)`.
fn fixed_gamma(cfg: &ExperimentConfig, sigma2: f64, n: usize) -> f64 {
    if cfg.fixed_gamma >= 0.0 {
        cfg.fixed_gamma
    } else {
        (cfg.alpha * sigma2 / n as f64).sqrt()
    }
}

fn build_lane(
    cfg: &ExperimentConfig,
    spec: AlgorithmSpec,
    downlink: &Downlink,
    sigma2: f64,
    iterations: usize,
    trace: bool,
) -> Result<Lane> {
    let conv = downlink.desired_conv();
    let mut e0 = CVector::zeros(conv.taps());
    e0[0] = Complex64::new(1.0, 0.0);
    let limits = step_bounds(conv, 1.0, 1.0, &e0)?;
    let estimator = EstimatorState::new(conv, cfg.mu_h_fraction * limits.mu_h_max, cfg.mu_a_fraction * limits.mu_a_max)?;
    let w0 = ReceiverWeights::new(estimator.f_rake().clone());
    let filter: Box<dyn AdaptiveFilter> = match spec.family {
        Family::Nlms => Box::new(Nlms::new(w0, cfg.nlms_step, 1e-12)?),
        Family::Ap => Box::new(Ap::new(w0, cfg.ap_order, cfg.ap_step, cfg.ap_delta)?),
        Family::Rls => Box::new(Rls::new(w0, cfg.rls_lambda, cfg.rls_delta)?),
        Family::SmNlms => Box::new(SmNlms::new(w0)),
        Family::SmAp => Box::new(SmAp::new(w0, cfg.ap_order, cfg.ap_delta)?),
        Family::Beacon => Box::new(Beacon::new(w0, cfg.beacon_epsilon)?),
    };
    let gamma0 = fixed_gamma(cfg, sigma2, downlink.processing_gain());
    // d is measured at the RAKE output, so the tracker starts at the noise
    // floor seen there.
    let v_hat = sigma2 * estimator.f_rake().norm_squared();
    let bound = match spec.bound {
        None => None,
        Some(BoundKind::Fixed) => Some(BoundState::fixed_bound(gamma0)?),
        Some(kind) => {
            let mut b = BoundState::time_varying(kind, gamma0, cfg.alpha, cfg.beta, cfg.tau, sigma2)?;
            b.v_hat = v_hat;
            Some(b)
        }
    };
    Ok(Lane {
        spec,
        filter,
        bound,
        v_hat,
        estimator,
        metrics: MetricAccumulator::new(iterations),
        trace: trace.then(LaneTrace::default),
    })
}

fn random_symbols<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Vec<Complex64> {
    (0..users).map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect()
}

/// One Monte-Carlo run of every receiver in `specs` at `point`.
pub fn simulate_run(
    cfg: &ExperimentConfig,
    specs: &[AlgorithmSpec],
    point: &PointParams,
    run: u64,
    trace: bool,
) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run);

    let codes = gold_family(cfg.code_degree)?.into_iter().take(point.users).collect();
    let downlink = Downlink::new(codes, cfg.channel_taps, cfg.desired_user)?;
    let n = downlink.processing_gain();
    let sigma2 = point.noise_sigma2(n);
    let d = cfg.desired_user;
    let len = cfg.packet_length;

    let delays = draw_delays(cfg.path_powers_db.len(), &mut rng);
    let mut channel = ChannelState::clarke(&cfg.path_powers_db, delays, point.fd_t, cfg.sinusoids, &mut rng)?;
    let amplitudes: Vec<f64> = (0..point.users)
        .map(|k| {
            let g: f64 = rng.sample(StandardNormal);
            if k == d {
                1.0
            } else {
                10f64.powf(cfg.interferer_spread_db * g / 20.0)
            }
        })
        .collect();

    let mut lanes =
        specs.iter().map(|&s| build_lane(cfg, s, &downlink, sigma2, len, trace)).collect::<Result<Vec<_>>>()?;
    let mut snapshots = Vec::new();
    let mut window = SymbolWindow {
        previous: random_symbols(point.users, &mut rng),
        current: random_symbols(point.users, &mut rng),
        next: random_symbols(point.users, &mut rng),
    };

    for i in 0..len {
        if i > 0 {
            channel.evolve();
            window.previous = std::mem::take(&mut window.current);
            window.current = std::mem::take(&mut window.next);
            window.next = random_symbols(point.users, &mut rng);
        }
        let h = channel.impulse_response(cfg.channel_taps)?;
        let geometry = downlink.geometry(&h)?;
        let record = geometry.synthesize(&amplitudes, &window, sigma2, d, &mut rng)?;
        let r = &record.received;
        let truth = window.current[d].re;
        if trace {
            snapshots.push(h.clone());
        }

        for lane in &mut lanes {
            let w = lane.filter.weights();
            let (signal, interference) = match cfg.sinr_estimator {
                SinrEstimator::Sample => (
                    w.w.dotc(&record.desired_component).norm_sqr(),
                    (w.w.dotc(&record.interference_component) + w.w.dotc(&record.noise_component)).norm_sqr(),
                ),
                SinrEstimator::Conditional => (
                    geometry.desired_power(&w.w, &amplitudes, d),
                    geometry.interference_power(&w.w, &amplitudes, d, sigma2),
                ),
            };
            lane.metrics.signal[i] += signal;
            lane.metrics.interference[i] += interference;
            let decision = detect(w, r);
            if i >= cfg.training_length {
                lane.metrics.decided_bits += 1;
                lane.metrics.bit_errors += u64::from(decision.symbol != truth);
            }
            let b_ref = Complex64::new(if i < cfg.training_length { truth } else { decision.symbol }, 0.0);

            // d uses the a priori estimates: after the SG step they have
            // already absorbed part of this symbol's interference.
            let x = lane.estimator.rake_output(r)?;
            let sample = lane.estimator.interference_sample(x, b_ref);
            let genie = geometry.interference_power(lane.estimator.f_rake(), &amplitudes, d, sigma2);
            lane.estimator.joint_sg_step(downlink.desired_conv(), b_ref, r);
            if !lane.estimator.a_hat.is_finite() || lane.estimator.h_hat.iter().any(|c| !c.norm_sqr().is_finite()) {
                return Err(Error::DegenerateEstimate("channel/amplitude estimator diverged"));
            }

            lane.v_hat = relax(lane.v_hat, sample.norm_sqr(), cfg.beta);
            let gamma = match &mut lane.bound {
                Some(bound) => {
                    bound.step(lane.filter.weights(), sample);
                    bound.gamma
                }
                None => f64::INFINITY,
            };
            let outcome = lane.filter.update(r, b_ref, gamma)?;

            let v_hat = lane.v_hat;
            lane.metrics.updates[i] += u64::from(outcome.updated);
            lane.metrics.v_hat[i] += v_hat;
            lane.metrics.genie[i] += genie;

            if let Some(t) = &mut lane.trace {
                t.filter.push(FilterTraceRow {
                    symbol: i,
                    prior_error_magnitude: outcome.prior_error.norm(),
                    gamma,
                    updated: outcome.updated,
                    step: outcome.step_or_lambda,
                });
                t.bound.push(BoundTraceRow { symbol: i, gamma, v_hat });
                t.estimator.push(EstimatorTraceRow {
                    symbol: i,
                    channel_error: (&lane.estimator.h_hat - &h).norm(),
                    a_hat: lane.estimator.a_hat,
                    interference_sample_power: sample.norm_sqr(),
                    genie_power: genie,
                });
            }
        }
    }

    let trace = trace.then(|| (snapshots, lanes.iter_mut().map(|l| l.trace.take().unwrap_or_default()).collect()));
    let lanes = lanes
        .into_iter()
        .map(|mut l| {
            l.metrics.runs = 1;
            debug_assert!(l.spec.is_set_membership() == l.bound.is_some());
            l.metrics
        })
        .collect();
    Ok(RunOutput { lanes, trace })
}

fn grid(cfg: &ExperimentConfig) -> Vec<PointParams> {
    let base = PointParams { users: cfg.users, eb_n0_db: cfg.eb_n0_db, fd_t: cfg.fd_t, x_value: 0.0 };
    match cfg.scenario {
        Scenario::InterferenceTracking | Scenario::SinrConvergence => vec![base],
        Scenario::BerVsSnr => cfg.eb_n0_grid.iter().map(|&e| PointParams { eb_n0_db: e, x_value: e, ..base }).collect(),
        Scenario::BerVsUsers => {
            cfg.users_grid.iter().map(|&k| PointParams { users: k, x_value: k as f64, ..base }).collect()
        }
        Scenario::BerVsDoppler => cfg.fd_t_grid.iter().map(|&f| PointParams { fd_t: f, x_value: f, ..base }).collect(),
    }
}

/// Run every grid point of `cfg` and render its artifacts.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    cfg.validate()?;
    let specs = cfg.algorithm_specs()?;
    let n = (1usize << cfg.code_degree) - 1;
    let mut points = Vec::new();
    let mut files = Vec::new();

    for (p_idx, params) in grid(cfg).into_iter().enumerate() {
        let outputs: Vec<RunOutput> = (0..cfg.runs as u64)
            .into_par_iter()
            .map(|run| simulate_run(cfg, &specs, &params, run, cfg.trace && run == 0 && p_idx == 0))
            .collect::<Result<_>>()?;
        let mut merged: Vec<MetricAccumulator> = specs.iter().map(|_| MetricAccumulator::new(cfg.packet_length)).collect();
        for out in &outputs {
            for (acc, lane) in merged.iter_mut().zip(&out.lanes) {
                acc.merge(lane)?;
            }
        }
        if let Some((snapshots, traces)) = outputs.first().and_then(|o| o.trace.as_ref()) {
            files.push(("traces/channel.csv".into(), export::channel_trace_csv(snapshots)?));
            for (spec, t) in specs.iter().zip(traces) {
                files.push((format!("traces/filter_{spec}.csv"), export::filter_trace_csv(&t.filter)?));
                files.push((format!("traces/bound_{spec}.csv"), export::bound_trace_csv(&t.bound)?));
                files.push((format!("traces/estimator_{spec}.csv"), export::estimator_trace_csv(&t.estimator)?));
            }
        }
        let sigma2 = params.noise_sigma2(n);
        points.push(PointResult {
            params,
            noise_sigma2: sigma2,
            fixed_gamma: fixed_gamma(cfg, sigma2, n),
            lanes: specs.iter().zip(merged).map(|(&algorithm, metrics)| LaneResult { algorithm, metrics }).collect(),
        });
    }

    files.extend(tables(cfg, &points)?);
    files.push(("manifest.toml".into(), manifest(cfg, &points)));
    Ok(RunArtifact { config: cfg.clone(), points, files })
}

fn summary(points: &[PointResult]) -> Result<String> {
    let rows: Vec<SummaryRow> = points[0]
        .lanes
        .iter()
        .map(|l| SummaryRow {
            algorithm: l.algorithm.to_string(),
            update_rate: l.metrics.update_rate(),
            ber: l.metrics.ber().unwrap_or(f64::NAN),
        })
        .collect();
    export::summary_csv(&rows)
}

fn tables(cfg: &ExperimentConfig, points: &[PointResult]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    match cfg.scenario {
        Scenario::InterferenceTracking => {
            let lane = &points[0].lanes[0];
            let rows: Vec<InterferenceRow> = (0..cfg.packet_length)
                .map(|i| InterferenceRow {
                    iteration: i,
                    v_hat: lane.metrics.mean_v_hat(i),
                    genie_power: lane.metrics.mean_genie(i),
                })
                .collect();
            out.push(("interference.csv".into(), export::interference_csv(&rows)?));
            out.push(("summary.csv".into(), summary(points)?));
        }
        Scenario::SinrConvergence => {
            let mut rows = Vec::new();
            for i in 0..cfg.packet_length {
                for l in &points[0].lanes {
                    rows.push(SinrRow {
                        iteration: i,
                        algorithm: l.algorithm.to_string(),
                        mean_sinr_db: l.metrics.sinr_db(i)?,
                    });
                }
            }
            out.push(("sinr.csv".into(), export::sinr_csv(&rows)?));
            out.push(("summary.csv".into(), summary(points)?));
        }
        Scenario::BerVsSnr | Scenario::BerVsUsers | Scenario::BerVsDoppler => {
            let mut rows = Vec::new();
            for p in points {
                for l in &p.lanes {
                    rows.push(BerRow {
                        x_value: p.params.x_value,
                        algorithm: l.algorithm.to_string(),
                        ber: l.metrics.ber()?,
                        ur: l.metrics.update_rate(),
                    });
                }
            }
            out.push(("ber.csv".into(), export::ber_csv(&rows)?));
        }
    }
    Ok(out)
}

fn manifest(cfg: &ExperimentConfig, points: &[PointResult]) -> String {
    let mut doc = toml::Table::new();
    doc.insert("code_version".into(), CODE_VERSION.into());
    doc.insert("seed".into(), toml::Value::Integer(cfg.seed as i64));
    doc.insert("scenario".into(), cfg.scenario.name().into());
    let derived: Vec<toml::Value> = points
        .iter()
        .map(|p| {
            let mut t = toml::Table::new();
            t.insert("x_value".into(), p.params.x_value.into());
            t.insert("users".into(), toml::Value::Integer(p.params.users as i64));
            t.insert("eb_n0_db".into(), p.params.eb_n0_db.into());
            t.insert("fd_t".into(), p.params.fd_t.into());
            t.insert("noise_sigma2".into(), p.noise_sigma2.into());
            t.insert("fixed_gamma".into(), p.fixed_gamma.into());
            toml::Value::Table(t)
        })
        .collect();
    doc.insert("config".into(), toml::Value::Table(toml::Table::try_from(cfg).expect("config serializes")));
    doc.insert("point".into(), toml::Value::Array(derived));
    toml::to_string(&doc).expect("manifest serializes")
}
