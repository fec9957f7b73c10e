//! Experiment configuration: a flat TOML file whose omitted keys take the
//! defaults of the selected scenario.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::bounds::BoundKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    InterferenceTracking,
    SinrConvergence,
    BerVsSnr,
    BerVsUsers,
    BerVsDoppler,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::InterferenceTracking,
        Scenario::SinrConvergence,
        Scenario::BerVsSnr,
        Scenario::BerVsUsers,
        Scenario::BerVsDoppler,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::InterferenceTracking => "interference-tracking",
            Scenario::SinrConvergence => "sinr-convergence",
            Scenario::BerVsSnr => "ber-vs-snr",
            Scenario::BerVsUsers => "ber-vs-users",
            Scenario::BerVsDoppler => "ber-vs-doppler",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// How the per-iteration signal and interference powers entering the SINR
/// are sampled in each run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SinrEstimator {
    /// `|w^H s|^2` and `|w^H (i + n)|^2` of the actual received components.
    Sample,
    /// Expectation over symbols and noise given the run's channel and powers.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Nlms,
    Ap,
    Rls,
    SmNlms,
    SmAp,
    Beacon,
}

/// A receiver algorithm together with its bound controller (set-membership
/// families only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgorithmSpec {
    pub family: Family,
    pub bound: Option<BoundKind>,
}

impl AlgorithmSpec {
    pub fn is_set_membership(&self) -> bool {
        self.bound.is_some()
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.family {
            Family::Nlms => "nlms",
            Family::Ap => "ap",
            Family::Rls => "rls",
            Family::SmNlms => "sm-nlms",
            Family::SmAp => "sm-ap",
            Family::Beacon => "beacon",
        };
        match self.bound {
            None | Some(BoundKind::Fixed) => f.write_str(base),
            Some(kind) => write!(f, "{base}-{kind}"),
        }
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (base, bound) = match s.rsplit_once('-') {
            Some((b, "pdb")) => (b, Some(BoundKind::Pdb)),
            Some((b, "pidb")) => (b, Some(BoundKind::Pidb)),
            _ => (s.as_str(), None),
        };
        let family = match base {
            "nlms" => Family::Nlms,
            "ap" => Family::Ap,
            "rls" => Family::Rls,
            "sm-nlms" => Family::SmNlms,
            "sm-ap" => Family::SmAp,
            "beacon" => Family::Beacon,
            _ => return Err(Error::Config(format!("unknown algorithm `{s}`"))),
        };
        let set_membership = matches!(family, Family::SmNlms | Family::SmAp | Family::Beacon);
        let bound = match (set_membership, bound) {
            (true, None) => Some(BoundKind::Fixed),
            (true, b) => b,
            (false, None) => None,
            (false, Some(_)) => {
                return Err(Error::Config(format!("`{base}` updates every symbol and takes no error bound")))
            }
        };
        Ok(Self { family, bound })
    }
}

/// Every tunable of a run. Field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub runs: usize,
    /// Symbols per packet, training included.
    pub packet_length: usize,
    pub training_length: usize,
    pub users: usize,
    pub desired_user: usize,
    pub code_degree: u32,
    pub path_powers_db: Vec<f64>,
    /// Length of the chip-spaced channel and of the channel estimator.
    pub channel_taps: usize,
    pub fd_t: f64,
    pub sinusoids: usize,
    pub eb_n0_db: f64,
    /// Standard deviation (dB) of the interferers' log-normal power.
    pub interferer_spread_db: f64,
    pub eb_n0_grid: Vec<f64>,
    pub users_grid: Vec<usize>,
    pub fd_t_grid: Vec<f64>,
    pub algorithms: Vec<String>,
    /// Fixed bound, also the starting value of the time-varying bounds.
    /// Negative selects `sqrt(alpha ||w[0]||^2 sigma^2)`, the PDB drive at
    /// the initial weights.
    pub fixed_gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub nlms_step: f64,
    pub ap_step: f64,
    pub ap_order: usize,
    pub ap_delta: f64,
    pub rls_lambda: f64,
    pub rls_delta: f64,
    pub beacon_epsilon: f64,
    /// Channel estimator step as a fraction of its stability limit.
    pub mu_h_fraction: f64,
    /// Amplitude estimator step as a fraction of its stability limit.
    pub mu_a_fraction: f64,
    pub sinr_estimator: SinrEstimator,
    /// Write per-symbol traces of run 0.
    pub trace: bool,
}

impl ExperimentConfig {
    /// Defaults for `scenario`.
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut cfg = Self {
            scenario,
            seed: 1,
            runs: 100,
            packet_length: 1500,
            training_length: 200,
            users: 10,
            desired_user: 0,
            code_degree: 5,
            path_powers_db: vec![0.0, -3.0, -6.0],
            channel_taps: 6,
            fd_t: 1e-4,
            sinusoids: crate::cdma::DEFAULT_SINUSOIDS,
            eb_n0_db: 15.0,
            interferer_spread_db: 3.0,
            eb_n0_grid: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
            users_grid: vec![4, 8, 12, 16],
            fd_t_grid: vec![1e-5, 5e-5, 1e-4, 5e-4, 1e-3],
            algorithms: Vec::new(),
            fixed_gamma: -1.0,
            alpha: 8.0,
            beta: 0.05,
            tau: 2.0,
            nlms_step: 0.1,
            ap_step: 0.03,
            ap_order: 3,
            ap_delta: 1e-6,
            rls_lambda: 0.997,
            rls_delta: 0.01,
            beacon_epsilon: 0.01,
            mu_h_fraction: 0.03,
            mu_a_fraction: 0.03,
            sinr_estimator: SinrEstimator::Sample,
            trace: false,
        };
        let algos: &[&str] = match scenario {
            Scenario::InterferenceTracking => {
                cfg.users = 8;
                cfg.eb_n0_db = 12.0;
                cfg.packet_length = 1000;
                &["rls", "sm-nlms-pidb"]
            }
            Scenario::SinrConvergence => &["nlms", "sm-nlms", "sm-nlms-pdb", "sm-nlms-pidb"],
            Scenario::BerVsSnr | Scenario::BerVsUsers => &["sm-ap", "sm-ap-pdb", "sm-ap-pidb"],
            Scenario::BerVsDoppler => {
                cfg.alpha = 5.0;
                cfg.tau = 1.5;
                &["rls", "beacon", "beacon-pdb", "beacon-pidb"]
            }
        };
        cfg.algorithms = algos.iter().map(|s| s.to_string()).collect();
        cfg
    }

    /// Parse a config file body. `scenario` may be given in the file or
    /// supplied by the caller; the file wins when both are present and
    /// agree, and a disagreement is an error.
    pub fn from_toml_str(body: &str, scenario: Option<Scenario>) -> Result<Self> {
        let user: toml::Table = body.parse().map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        let file_scenario = match user.get("scenario") {
            Some(toml::Value::String(s)) => Some(s.parse::<Scenario>()?),
            Some(other) => return Err(Error::Config(format!("scenario must be a string, got {other}"))),
            None => None,
        };
        let scenario = match (file_scenario, scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for scenario `{a}`, command runs `{b}`")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("no scenario given".into())),
        };
        Self::for_scenario(scenario).merged(user)
    }

    /// Apply `key=value` assignments on top of this config. Values are read
    /// as TOML (`runs=20`, `algorithms=["rls"]`), falling back to a bare
    /// string (`sinr_estimator=conditional`).
    pub fn with_overrides(&self, assignments: &[String]) -> Result<Self> {
        let mut user = toml::Table::new();
        for a in assignments {
            let (key, raw) = a
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{a}` is not key=value")))?;
            let (key, raw) = (key.trim(), raw.trim());
            if key == "scenario" {
                return Err(Error::Config("the scenario is fixed by the subcommand".into()));
            }
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            user.insert(key.to_string(), value);
        }
        self.merged(user)
    }

    fn merged(&self, user: toml::Table) -> Result<Self> {
        let mut merged = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in user {
            if !merged.contains_key(&k) {
                return Err(Error::Config(format!("unknown config key `{k}`")));
            }
            merged.insert(k, v);
        }
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, scenario: Option<Scenario>) -> Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&body, scenario)
    }

    /// Flat TOML echo of every effective parameter.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn algorithm_specs(&self) -> Result<Vec<AlgorithmSpec>> {
        self.algorithms.iter().map(|a| a.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.runs == 0 {
            return fail("runs must be positive".into());
        }
        if self.packet_length == 0 || self.training_length > self.packet_length {
            return fail(format!("training {} / packet {}", self.training_length, self.packet_length));
        }
        if self.code_degree != 5 {
            return fail(format!("code degree {} unsupported (only 5)", self.code_degree));
        }
        let family_size = (1usize << self.code_degree) + 1;
        let n = (1usize << self.code_degree) - 1;
        let max_users = match self.scenario {
            Scenario::BerVsUsers => self.users_grid.iter().copied().max().unwrap_or(0),
            _ => self.users,
        };
        if max_users == 0 || max_users > family_size {
            return fail(format!("user count {max_users} outside 1..={family_size}"));
        }
        if self.scenario == Scenario::BerVsUsers && self.users_grid.iter().any(|&k| k == 0) {
            return fail("users_grid entries must be positive".into());
        }
        if self.desired_user >= self.users.min(self.users_grid.iter().copied().min().unwrap_or(self.users)) {
            return fail(format!("desired user {} out of range", self.desired_user));
        }
        if self.path_powers_db.is_empty() || self.channel_taps == 0 || self.channel_taps > n {
            return fail(format!("{} paths on {} taps", self.path_powers_db.len(), self.channel_taps));
        }
        // Worst case delay: two chips between consecutive paths.
        if 2 * (self.path_powers_db.len() - 1) >= self.channel_taps {
            return fail(format!(
                "{} paths can spread over {} chips, more than {} taps",
                self.path_powers_db.len(),
                2 * (self.path_powers_db.len() - 1) + 1,
                self.channel_taps
            ));
        }
        if !(self.fd_t >= 0.0) || self.fd_t_grid.iter().any(|f| !(*f >= 0.0)) || self.sinusoids == 0 {
            return fail("Doppler values must be non-negative".into());
        }
        let grid_empty = match self.scenario {
            Scenario::BerVsSnr => self.eb_n0_grid.is_empty(),
            Scenario::BerVsUsers => self.users_grid.is_empty(),
            Scenario::BerVsDoppler => self.fd_t_grid.is_empty(),
            _ => false,
        };
        if grid_empty {
            return fail(format!("empty sweep grid for {}", self.scenario));
        }
        let specs = self.algorithm_specs()?;
        if specs.is_empty() {
            return fail("no algorithms selected".into());
        }
        let sm = specs.iter().any(|s| s.is_set_membership());
        if sm && !(self.beta > 0.0 && self.beta < 1.0) {
            return fail(format!("beta = {} must lie in (0, 1)", self.beta));
        }
        if sm && (!(self.alpha > 0.0) || !(self.tau >= 0.0) || self.fixed_gamma.is_nan()) {
            return fail(format!("alpha = {}, tau = {}, fixed gamma = {}", self.alpha, self.tau, self.fixed_gamma));
        }
        if !(self.nlms_step > 0.0 && self.nlms_step < 2.0) || !(self.ap_step > 0.0 && self.ap_step < 2.0) {
            return fail(format!("NLMS/AP steps {} / {} outside (0, 2)", self.nlms_step, self.ap_step));
        }
        if self.ap_order == 0 || !(self.ap_delta >= 0.0) {
            return fail(format!("AP order {} / delta {}", self.ap_order, self.ap_delta));
        }
        if !(self.rls_lambda > 0.0 && self.rls_lambda <= 1.0) || !(self.rls_delta > 0.0) || !(self.beacon_epsilon > 0.0) {
            return fail("RLS lambda must lie in (0, 1]; RLS delta and BEACON epsilon must be positive".into());
        }
        if !(self.mu_h_fraction > 0.0) || !(self.mu_a_fraction > 0.0) {
            return fail("estimator step fractions must be positive".into());
        }
        if !(self.interferer_spread_db >= 0.0) {
            return fail("interferer spread must be non-negative".into());
        }
        Ok(())
    }
}
