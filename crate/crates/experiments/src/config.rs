//! Flat `key = value` experiment configuration with scenario presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use d2d_core::analytic::CellApprox;
use d2d_core::ScheduleMode;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig4,
    Densities,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Densities => "densities",
            Scenario::Custom => "custom",
        }
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(Scenario::Fig2),
            "fig3" => Ok(Scenario::Fig3),
            "fig4" => Ok(Scenario::Fig4),
            "densities" => Ok(Scenario::Densities),
            "custom" => Ok(Scenario::Custom),
            _ => Err(ConfigError::new("scenario", format!("unknown scenario `{s}` (fig2|fig3|fig4|densities|custom)"))),
        }
    }
}

/// Source of the D2D coverage term in rate evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub trials: u64,
    pub out: Option<PathBuf>,

    pub lambda_a: f64,
    pub lambda_d: f64,
    pub lambda_c: f64,
    pub alpha: f64,
    pub n_sc: u32,
    pub r_d: f64,
    pub theta_db: f64,
    pub mode: ScheduleMode,
    pub cell_approx: CellApprox,

    /// `None` means the fair split `lambda_d / (lambda_c + lambda_d)`.
    pub eta: Option<f64>,
    pub optimize_eta: bool,
    pub n_max: u32,
    pub log_base: f64,
    pub backend: Backend,

    /// Expected AP count of the D2D simulation window.
    pub window_aps: f64,
    pub cellular_aps: f64,
    pub cellular_trials: u64,

    pub theta_min_db: f64,
    pub theta_max_db: f64,
    pub theta_points: usize,
    /// Link distances in units of the mean AP distance `1/(2 sqrt(lambda_a))`.
    pub rd_norm_min: f64,
    pub rd_norm_max: f64,
    pub rd_points: usize,
    pub theta0_db_list: Vec<f64>,
    pub n_list: Vec<u32>,
}

impl ExperimentConfig {
    pub fn preset(scenario: Scenario) -> Self {
        let base = Self {
            scenario,
            seed: 0,
            trials: 100_000,
            out: None,
            lambda_a: 1.0,
            lambda_d: 10.0,
            lambda_c: 10.0,
            alpha: 4.0,
            n_sc: 10,
            r_d: 0.3,
            theta_db: 0.0,
            mode: ScheduleMode::Coordinated,
            cell_approx: CellApprox::B2,
            eta: None,
            optimize_eta: false,
            n_max: 64,
            log_base: 2.0,
            backend: Backend::Analytic,
            window_aps: 120.0,
            cellular_aps: 1000.0,
            cellular_trials: 100_000,
            theta_min_db: -20.0,
            theta_max_db: 20.0,
            theta_points: 41,
            rd_norm_min: 0.1,
            rd_norm_max: 2.0,
            rd_points: 20,
            theta0_db_list: vec![-10.0, 0.0, 10.0],
            n_list: vec![10, 20],
        };
        match scenario {
            Scenario::Fig2 | Scenario::Custom => base,
            Scenario::Fig3 => Self { window_aps: 30.0, ..base },
            Scenario::Fig4 => Self {
                eta: Some(0.5),
                ..base
            },
            Scenario::Densities => Self {
                n_sc: 5,
                window_aps: 30.0,
                ..base
            },
        }
    }

    /// Preset chosen by a `scenario` key in `text`, then every other key.
    pub fn from_text(text: &str, default: Scenario) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let scenario = match pairs.iter().rev().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse()?,
            None => default,
        };
        let mut cfg = Self::preset(scenario);
        for (k, v) in &pairs {
            if k != "scenario" {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "scenario" => {
                return Err(ConfigError::new("scenario", "only settable as the preset selector"));
            }
            "seed" => self.seed = parse(&key, value)?,
            "trials" => self.trials = parse(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "lambda_a" => self.lambda_a = parse(&key, value)?,
            "lambda_d" => self.lambda_d = parse(&key, value)?,
            "lambda_c" => self.lambda_c = parse(&key, value)?,
            "alpha" => self.alpha = parse(&key, value)?,
            "n_sc" => self.n_sc = parse(&key, value)?,
            "rd" => self.r_d = parse(&key, value)?,
            "theta_db" => self.theta_db = parse(&key, value)?,
            "mode" => self.mode = parse_mode(value)?,
            "cell_approx" => self.cell_approx = parse_approx(value)?,
            "eta" => {
                self.eta = match value {
                    "fair" => None,
                    _ => Some(parse(&key, value)?),
                }
            }
            "optimize_eta" => self.optimize_eta = parse(&key, value)?,
            "n_max" => self.n_max = parse(&key, value)?,
            "log_base" => self.log_base = parse(&key, value)?,
            "backend" => {
                self.backend = match value {
                    "analytic" => Backend::Analytic,
                    "mc" | "monte_carlo" => Backend::MonteCarlo,
                    _ => return Err(ConfigError::new(key, format!("expected analytic|mc, got `{value}`"))),
                }
            }
            "window_aps" => self.window_aps = parse(&key, value)?,
            "cellular_aps" => self.cellular_aps = parse(&key, value)?,
            "cellular_trials" => self.cellular_trials = parse(&key, value)?,
            "theta_min_db" => self.theta_min_db = parse(&key, value)?,
            "theta_max_db" => self.theta_max_db = parse(&key, value)?,
            "theta_points" => self.theta_points = parse(&key, value)?,
            "rd_norm_min" => self.rd_norm_min = parse(&key, value)?,
            "rd_norm_max" => self.rd_norm_max = parse(&key, value)?,
            "rd_points" => self.rd_points = parse(&key, value)?,
            "theta0_db_list" => self.theta0_db_list = parse_list(&key, value)?,
            "n_list" => self.n_list = parse_list(&key, value)?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("lambda_a", self.lambda_a),
            ("lambda_d", self.lambda_d),
            ("lambda_c", self.lambda_c),
            ("rd", self.r_d),
            ("window_aps", self.window_aps),
            ("cellular_aps", self.cellular_aps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(ConfigError::new("alpha", format!("must be finite and > 2, got {}", self.alpha)));
        }
        if self.n_sc == 0 {
            return Err(ConfigError::new("n_sc", "must be >= 1"));
        }
        if self.n_max == 0 {
            return Err(ConfigError::new("n_max", "must be >= 1"));
        }
        if self.n_list.contains(&0) {
            return Err(ConfigError::new("n_list", "entries must be >= 1"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be >= 1"));
        }
        if self.cellular_trials == 0 {
            return Err(ConfigError::new("cellular_trials", "must be >= 1"));
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(ConfigError::new("eta", format!("must lie in [0, 1], got {eta}")));
            }
        }
        if !(self.log_base > 1.0) {
            return Err(ConfigError::new("log_base", "must be > 1"));
        }
        if self.theta_points == 0 || !(self.theta_min_db <= self.theta_max_db) {
            return Err(ConfigError::new("theta_points", "need at least one point and theta_min_db <= theta_max_db"));
        }
        if self.rd_points == 0 || !(self.rd_norm_min > 0.0 && self.rd_norm_min <= self.rd_norm_max) {
            return Err(ConfigError::new("rd_points", "need at least one point and 0 < rd_norm_min <= rd_norm_max"));
        }
        if !self.theta_db.is_finite() {
            return Err(ConfigError::new("theta_db", "must be finite"));
        }
        Ok(())
    }

    /// Mean distance from a point to its nearest AP, `1/(2 sqrt(lambda_a))`.
    pub fn mean_ap_distance(&self) -> f64 {
        0.5 / self.lambda_a.sqrt()
    }

    pub fn theta_grid_db(&self) -> Vec<f64> {
        linspace(self.theta_min_db, self.theta_max_db, self.theta_points)
    }

    pub fn rd_norm_grid(&self) -> Vec<f64> {
        linspace(self.rd_norm_min, self.rd_norm_max, self.rd_points)
    }

    pub fn eta_or_fair(&self) -> f64 {
        self.eta.unwrap_or(self.lambda_d / (self.lambda_c + self.lambda_d))
    }
}

impl fmt::Display for ExperimentConfig {
    /// Single-line `key=value` summary used in CSV comment headers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scenario={} seed={} trials={} lambda_a={} lambda_d={} lambda_c={} alpha={} n_sc={} rd={} theta_db={} mode={} cell_approx={} window_aps={}",
            self.scenario.name(),
            self.seed,
            self.trials,
            self.lambda_a,
            self.lambda_d,
            self.lambda_c,
            self.alpha,
            self.n_sc,
            self.r_d,
            self.theta_db,
            mode_name(self.mode),
            self.cell_approx.name(),
            self.window_aps,
        )
    }
}

pub fn mode_name(mode: ScheduleMode) -> &'static str {
    match mode {
        ScheduleMode::Coordinated => "coord",
        ScheduleMode::Uncoordinated => "uncoord",
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive, computed from the
/// index so the endpoints are exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::new(format!("line {}", i + 1), format!("expected key = value, got `{line}`")));
        };
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V, ConfigError>
where
    V::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError::new(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<V: FromStr>(key: &str, value: &str) -> Result<Vec<V>, ConfigError>
where
    V::Err: fmt::Display,
{
    let items: Vec<V> = value
        .split(',')
        .map(|s| parse(key, s.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::new(key, "empty list"));
    }
    Ok(items)
}

pub fn parse_mode(value: &str) -> Result<ScheduleMode, ConfigError> {
    match value {
        "coord" | "coordinated" => Ok(ScheduleMode::Coordinated),
        "uncoord" | "uncoordinated" => Ok(ScheduleMode::Uncoordinated),
        _ => Err(ConfigError::new("mode", format!("expected coord|uncoord, got `{value}`"))),
    }
}

pub fn parse_approx(value: &str) -> Result<CellApprox, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "b1" => Ok(CellApprox::B1),
        "b2" => Ok(CellApprox::B2),
        "b1-literal" | "b1_literal" => Ok(CellApprox::B1Literal),
        _ => Err(ConfigError::new("cell_approx", format!("expected b1|b2|b1-literal, got `{value}`"))),
    }
}
