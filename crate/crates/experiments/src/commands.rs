//! Single-configuration drivers behind the `simulate`, `analytic`,
//! `densities`, `rate` and `optimize` subcommands.

use d2d_core::analytic::{coordinated_ccdf, interferer_densities, regularized_upper_gamma, uncoordinated_ccdf, CellApprox, QuadratureSpec};
use d2d_core::rate::{
    average_rate, default_bracket, max_beneficial_distance, optimize_eta, optimize_subchannels, scenario_baseline,
    BeneficialDistance, RateBreakdown,
};
use d2d_core::sir::{run_density_trials, DensityTrial};
use d2d_core::{db_to_linear, run_d2d_batch, EmpiricalCcdf};

use crate::config::{mode_name, ExperimentConfig};
use crate::csv::{Cell, Table};
use crate::figures::crossing_name;
use crate::{analytic_params, cellular_cache, d2d_batch, rate_params, RunResult};

pub fn simulate(cfg: &ExperimentConfig) -> RunResult<EmpiricalCcdf<f64>> {
    let thetas: Vec<f64> = cfg.theta_grid_db().iter().map(|&d| db_to_linear(d)).collect();
    Ok(run_d2d_batch(&d2d_batch(cfg, cfg.n_sc, cfg.mode, cfg.r_d)?, &thetas, cfg.trials)?)
}

pub fn simulate_table(cfg: &ExperimentConfig, ccdf: &EmpiricalCcdf<f64>) -> Table {
    let mut t = Table::new("simulate/v1", &["theta_db", "ccdf", "ci_halfwidth", "successes"]);
    t.comment(cfg.to_string());
    for (i, db) in cfg.theta_grid_db().into_iter().enumerate() {
        t.push(vec![
            db.into(),
            ccdf.survival[i].into(),
            ccdf.half_width[i].into(),
            Cell::Int(ccdf.successes[i] as i64),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurves {
    pub theta_db: Vec<f64>,
    pub uncoord: Vec<f64>,
    pub coord: Vec<f64>,
}

pub fn analytic(cfg: &ExperimentConfig) -> RunResult<AnalyticCurves> {
    let p = analytic_params(cfg, cfg.n_sc, cfg.r_d, cfg.cell_approx)?;
    let quad = QuadratureSpec::default();
    let theta_db = cfg.theta_grid_db();
    let mut uncoord = Vec::with_capacity(theta_db.len());
    let mut coord = Vec::with_capacity(theta_db.len());
    for &db in &theta_db {
        let theta = db_to_linear(db);
        uncoord.push(uncoordinated_ccdf(&p, theta)?);
        coord.push(coordinated_ccdf(&p, theta, &quad)?);
    }
    Ok(AnalyticCurves { theta_db, uncoord, coord })
}

impl AnalyticCurves {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let coord = format!("ana_coord_{}", cfg.cell_approx.name().replace('-', "_"));
        let mut t = Table::with_columns("analytic/v1", vec!["theta_db".into(), "ana_uncoord".into(), coord]);
        t.comment(cfg.to_string());
        for i in 0..self.theta_db.len() {
            t.push(vec![self.theta_db[i].into(), self.uncoord[i].into(), self.coord[i].into()]);
        }
        t
    }
}

/// A simulated mean next to its model prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub simulated: f64,
    pub predicted: f64,
    pub std_error: f64,
}

impl Comparison {
    pub fn rel_error(&self) -> f64 {
        (self.simulated - self.predicted) / self.predicted
    }

    pub fn z_score(&self) -> f64 {
        (self.simulated - self.predicted) / self.std_error
    }
}

/// Density checks around one choice of typical cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFraming {
    /// Co-channel interferers per unit area outside the cell.
    pub intercell: Comparison,
    /// Intracell co-channel count against the per-trial B2 disc.
    pub intracell_b2: Comparison,
    pub intracell_b1: Comparison,
    /// Same prediction evaluated at the true cell area of each trial.
    pub intracell_cell: Comparison,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    pub n: u32,
    pub trials: u64,
    /// Around the typical transmitter's cell, where it is scheduled.
    pub tx_cell: CellFraming,
    /// Around the typical receiver's cell.
    pub rx_cell: CellFraming,
    pub mean_k0: f64,
}

pub fn densities(cfg: &ExperimentConfig) -> RunResult<Densities> {
    let n = cfg.n_sc;
    let trials = run_density_trials(&d2d_batch(cfg, n, cfg.mode, cfg.r_d)?, cfg.trials)?;
    let b2 = analytic_params(cfg, n, cfg.r_d, CellApprox::B2)?;
    let b1 = analytic_params(cfg, n, cfg.r_d, CellApprox::B1)?;
    let thin = cfg.lambda_d / n as f64;

    let mut pred_b2 = Vec::with_capacity(trials.len());
    let mut pred_b1 = Vec::with_capacity(trials.len());
    for t in &trials {
        pred_b2.push(interferer_densities(&b2, t.r_a)?.intracell * CellApprox::B2.area(t.r_a));
        pred_b1.push(interferer_densities(&b1, t.r_a)?.intracell * CellApprox::B1.area(t.r_a));
    }
    let b2_mean = mean_se(&pred_b2).0;
    let b1_mean = mean_se(&pred_b1).0;
    let framing = |intra: &[f64], inter: &[f64], area: &[f64]| -> RunResult<CellFraming> {
        let (intra_mean, intra_se) = mean_se(intra);
        let (inter_mean, inter_se) = mean_se(inter);
        let pred_cell: Vec<f64> = area
            .iter()
            .map(|&a| Ok(thin * (1.0 - regularized_upper_gamma(n - 1, cfg.lambda_d * a)?) * a))
            .collect::<RunResult<_>>()?;
        let cmp = |predicted| Comparison {
            simulated: intra_mean,
            predicted,
            std_error: intra_se,
        };
        Ok(CellFraming {
            intercell: Comparison {
                simulated: inter_mean,
                predicted: thin,
                std_error: inter_se,
            },
            intracell_b2: cmp(b2_mean),
            intracell_b1: cmp(b1_mean),
            intracell_cell: cmp(mean_se(&pred_cell).0),
        })
    };
    let col = |f: &dyn Fn(&DensityTrial<f64>) -> f64| trials.iter().map(f).collect::<Vec<f64>>();
    let tx_cell = framing(
        &col(&|t| t.tx_intracell_count as f64),
        &col(&|t| t.tx_intercell_count as f64 / (t.window_area - t.tx_cell_area)),
        &col(&|t| t.tx_cell_area),
    )?;
    let rx_cell = framing(
        &col(&|t| t.rx_intracell_count as f64),
        &col(&|t| t.rx_intercell_count as f64 / (t.window_area - t.rx_cell_area)),
        &col(&|t| t.rx_cell_area),
    )?;
    Ok(Densities {
        n,
        trials: cfg.trials,
        tx_cell,
        rx_cell,
        mean_k0: mean_se(&col(&|t| t.k0 as f64)).0,
    })
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

impl Densities {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut t = Table::new(
            "densities/v1",
            &["quantity", "cell", "simulated", "predicted", "std_error", "rel_error"],
        );
        t.comment(cfg.to_string());
        t.comment("cell: tx = typical transmitter's cell, rx = typical receiver's cell");
        t.comment("intercell_density is per unit area; intracell counts are per typical cell");
        t.comment(format!("mean other transmitters in the typical transmitter's cell = {}", crate::fmt_g9(self.mean_k0)));
        for (cell, f) in [("tx", &self.tx_cell), ("rx", &self.rx_cell)] {
            for (name, c) in [
                ("intercell_density", f.intercell),
                ("intracell_count_B2", f.intracell_b2),
                ("intracell_count_B1", f.intracell_b1),
                ("intracell_count_true_cell", f.intracell_cell),
            ] {
                t.push(vec![
                    name.into(),
                    cell.into(),
                    c.simulated.into(),
                    c.predicted.into(),
                    c.std_error.into(),
                    c.rel_error().into(),
                ]);
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub breakdown: RateBreakdown<f64>,
    pub baseline: f64,
}

pub fn rate(cfg: &ExperimentConfig) -> RunResult<RatePoint> {
    let cache = cellular_cache(cfg);
    let p = rate_params(cfg)?;
    Ok(RatePoint {
        breakdown: average_rate(&p, cfg.n_sc, &cache)?,
        baseline: scenario_baseline(&p, &cache)?,
    })
}

const RATE_COLUMNS: [&str; 10] = [
    "rd_dist",
    "n_sc",
    "eta",
    "rate_cellular_bpshz",
    "rate_d2d_bpshz",
    "rate_total_bpshz",
    "e_inv_kc",
    "p_cov_cellular",
    "p_cov_d2d",
    "rate_baseline_bpshz",
];

fn rate_row(cfg: &ExperimentConfig, b: &RateBreakdown<f64>, baseline: f64) -> Vec<Cell> {
    vec![
        cfg.r_d.into(),
        b.n_opt.into(),
        b.eta.into(),
        b.r_cellular.into(),
        b.r_d2d.into(),
        b.r_total.into(),
        b.e_inv_kc.into(),
        b.p_cov_cellular.into(),
        b.p_cov_d2d.into(),
        baseline.into(),
    ]
}

impl RatePoint {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut t = Table::new("rate/v1", &RATE_COLUMNS);
        t.comment(cfg.to_string());
        t.push(rate_row(cfg, &self.breakdown, self.baseline));
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub best: RateBreakdown<f64>,
    pub baseline: f64,
    pub max_distance: BeneficialDistance<f64>,
}

/// Best `N` (and `eta` when requested) at the configured link distance, and
/// the longest link for which D2D still beats the cellular-only baseline.
pub fn optimize(cfg: &ExperimentConfig) -> RunResult<Optimum> {
    let cache = cellular_cache(cfg);
    let p = rate_params(cfg)?;
    let best = if cfg.optimize_eta {
        let mut best: Option<RateBreakdown<f64>> = None;
        for n in p.n_min..=p.n_max {
            let r = optimize_eta(&p, n, &cache)?;
            if best.is_none_or(|b| r.r_total > b.r_total) {
                best = Some(r);
            }
        }
        best.expect("non-empty range")
    } else {
        optimize_subchannels(&p, &cache)?
    };
    Ok(Optimum {
        best,
        baseline: scenario_baseline(&p, &cache)?,
        max_distance: max_beneficial_distance(&p, default_bracket(cfg.lambda_a), &cache)?,
    })
}

impl Optimum {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut cols: Vec<String> = RATE_COLUMNS.iter().map(|s| s.to_string()).collect();
        cols[1] = "n_opt".into();
        cols.extend(["rd_max_dist".into(), "rd_max_norm".into(), "crossing".into()]);
        let mut t = Table::with_columns("optimize/v1", cols);
        t.comment(cfg.to_string());
        t.comment(format!("mode={} rd_max at eta={}", mode_name(cfg.mode), cfg.eta_or_fair()));
        let mut row = rate_row(cfg, &self.best, self.baseline);
        row.push(self.max_distance.r_d.into());
        row.push((self.max_distance.r_d / cfg.mean_ap_distance()).into());
        row.push(crossing_name(self.max_distance.crossing).into());
        t.push(row);
        t
    }
}

