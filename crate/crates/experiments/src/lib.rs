//! Experiment drivers for the D2D model: simulation and analytic ccdfs,
//! interferer-density checks, rate optimization and the figure sweeps.
//! Every driver returns typed results plus a [`csv::Table`].

pub mod commands;
pub mod config;
pub mod csv;
pub mod figures;

use d2d_core::analytic::{kappa, AnalyticParams, CellApprox};
use d2d_core::rate::{CellularCache, CellularSettings, RateBackend, RateParams};
use d2d_core::{db_to_linear, D2dBatchConfig, PppConfig, ScheduleConfig, ScheduleMode, SimWindow};
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, Scenario};
pub use csv::{fmt_g9, Cell, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] d2d_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Model(e) if e.is_numerical() => 3,
            RunError::Model(_) => 2,
            RunError::Io(_) => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

pub fn d2d_batch(cfg: &ExperimentConfig, n: u32, mode: ScheduleMode, r_d: f64) -> RunResult<D2dBatchConfig<f64>> {
    let ppp = PppConfig::new(cfg.lambda_a, cfg.lambda_d, r_d, cfg.seed)?
        .with_window(SimWindow::for_expected_count(cfg.lambda_a, cfg.window_aps)?);
    Ok(D2dBatchConfig {
        ppp,
        schedule: ScheduleConfig::new(n, mode)?,
        alpha: cfg.alpha,
    })
}

pub fn analytic_params(cfg: &ExperimentConfig, n: u32, r_d: f64, approx: CellApprox) -> RunResult<AnalyticParams<f64>> {
    Ok(AnalyticParams::new(cfg.lambda_a, cfg.lambda_d, n, r_d, cfg.alpha, approx)?)
}

pub fn cellular_cache(cfg: &ExperimentConfig) -> CellularCache<f64> {
    CellularCache::new(CellularSettings {
        trials: cfg.cellular_trials,
        seed: cfg.seed,
        window_aps: cfg.cellular_aps,
    })
}

pub fn rate_params(cfg: &ExperimentConfig) -> RunResult<RateParams<f64>> {
    let backend = match cfg.backend {
        config::Backend::Analytic => RateBackend::Analytic(cfg.cell_approx),
        config::Backend::MonteCarlo => RateBackend::MonteCarlo {
            trials: cfg.trials,
            seed: cfg.seed,
            window_aps: cfg.window_aps,
        },
    };
    let mut p = RateParams::new(cfg.lambda_a, cfg.lambda_c, cfg.lambda_d, db_to_linear(cfg.theta_db), cfg.alpha, cfg.r_d)?
        .with_eta(cfg.eta_or_fair())
        .with_mode(cfg.mode)
        .with_n_range(1, cfg.n_max)
        .with_backend(backend);
    p.log_base = cfg.log_base;
    p.validate()?;
    Ok(p)
}

/// SIR threshold (dB) at which the exact uncoordinated ccdf equals `level`.
pub fn uncoordinated_quantile_db(lambda_d: f64, n: u32, r_d: f64, alpha: f64, level: f64) -> RunResult<f64> {
    let k = kappa(alpha)?;
    let theta = (-level.ln() * n as f64 / (lambda_d * k * r_d * r_d)).powf(alpha / 2.0);
    Ok(10.0 * theta.log10())
}

/// Threshold (dB) exceeded by a `level` fraction of the samples.
pub fn empirical_quantile_db(sir: &[f64], level: f64) -> Option<f64> {
    if sir.is_empty() || !(0.0..1.0).contains(&level) {
        return None;
    }
    let mut v = sir.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((1.0 - level) * v.len() as f64).round() as usize;
    Some(10.0 * v[k.min(v.len() - 1)].log10())
}
