//! Figure sweeps: SIR ccdf vs threshold, outage vs link distance, and
//! average rate vs link distance.

use d2d_core::analytic::{coordinated_ccdf, uncoordinated_ccdf, CellApprox, QuadratureSpec};
use d2d_core::rate::{
    average_rate, default_bracket, max_beneficial_distance, optimize_subchannels, scenario_baseline, BeneficialDistance,
    Crossing, RateBreakdown,
};
use d2d_core::sir::run_d2d_samples;
use d2d_core::{db_to_linear, EmpiricalCcdf, ScheduleMode};

use crate::config::ExperimentConfig;
use crate::csv::{Cell, Table};
use crate::{analytic_params, cellular_cache, d2d_batch, empirical_quantile_db, rate_params, uncoordinated_quantile_db, RunResult};

/// Survival level at which SIR gains are read off (outage 0.1).
pub const GAIN_LEVEL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Curve {
    pub n: u32,
    pub sim: EmpiricalCcdf<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub uncoord: Vec<f64>,
    /// SIR (dB) reached by 90% of simulated coordinated links.
    pub sim_quantile_db: Option<f64>,
    pub uncoord_quantile_db: f64,
}

impl Fig2Curve {
    pub fn gain_db(&self) -> Option<f64> {
        self.sim_quantile_db.map(|q| q - self.uncoord_quantile_db)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2 {
    pub theta_db: Vec<f64>,
    pub uncoord_n1: Vec<f64>,
    pub curves: Vec<Fig2Curve>,
}

pub fn fig2(cfg: &ExperimentConfig) -> RunResult<Fig2> {
    let theta_db = cfg.theta_grid_db();
    let thetas: Vec<f64> = theta_db.iter().map(|&d| db_to_linear(d)).collect();
    let quad = QuadratureSpec::default();
    let uncoord_n1 = analytic_curve(cfg, 1, ScheduleMode::Uncoordinated, CellApprox::B2, cfg.r_d, &thetas, &quad)?;
    let mut curves = Vec::new();
    for &n in &cfg.n_list {
        let batch = d2d_batch(cfg, n, ScheduleMode::Coordinated, cfg.r_d)?;
        let sir: Vec<f64> = run_d2d_samples(&batch, cfg.trials)?.iter().map(|s| s.sir).collect();
        curves.push(Fig2Curve {
            n,
            sim: EmpiricalCcdf::from_values(&thetas, sir.iter().copied()),
            b1: analytic_curve(cfg, n, ScheduleMode::Coordinated, CellApprox::B1, cfg.r_d, &thetas, &quad)?,
            b2: analytic_curve(cfg, n, ScheduleMode::Coordinated, CellApprox::B2, cfg.r_d, &thetas, &quad)?,
            uncoord: analytic_curve(cfg, n, ScheduleMode::Uncoordinated, CellApprox::B2, cfg.r_d, &thetas, &quad)?,
            sim_quantile_db: empirical_quantile_db(&sir, GAIN_LEVEL),
            uncoord_quantile_db: uncoordinated_quantile_db(cfg.lambda_d, n, cfg.r_d, cfg.alpha, GAIN_LEVEL)?,
        });
    }
    Ok(Fig2 {
        theta_db,
        uncoord_n1,
        curves,
    })
}

fn analytic_curve(
    cfg: &ExperimentConfig,
    n: u32,
    mode: ScheduleMode,
    approx: CellApprox,
    r_d: f64,
    thetas: &[f64],
    quad: &QuadratureSpec<f64>,
) -> RunResult<Vec<f64>> {
    let p = analytic_params(cfg, n, r_d, approx)?;
    thetas
        .iter()
        .map(|&t| {
            Ok(match mode {
                ScheduleMode::Uncoordinated => uncoordinated_ccdf(&p, t)?,
                ScheduleMode::Coordinated => coordinated_ccdf(&p, t, quad)?,
            })
        })
        .collect()
}

impl Fig2 {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let ns: Vec<u32> = self.curves.iter().map(|c| c.n).collect();
        let mut cols = vec!["theta_db".to_string()];
        cols.extend(ns.iter().map(|n| format!("sim_coord_N{n}")));
        cols.extend(ns.iter().map(|n| format!("ana_coord_B1_N{n}")));
        cols.extend(ns.iter().map(|n| format!("ana_coord_B2_N{n}")));
        cols.push("ana_uncoord_N1".into());
        cols.extend(ns.iter().map(|n| format!("ana_uncoord_N{n}")));
        cols.extend(ns.iter().map(|n| format!("ci_halfwidth_N{n}")));
        let mut t = Table::with_columns("fig2/v1", cols);
        t.comment(cfg.to_string());
        t.comment("columns after theta_db are P(SIR >= theta); ci_halfwidth is the 95% half-width of sim_coord");
        for (i, &db) in self.theta_db.iter().enumerate() {
            let mut row = vec![Cell::from(db)];
            row.extend(self.curves.iter().map(|c| Cell::from(c.sim.survival[i])));
            row.extend(self.curves.iter().map(|c| Cell::from(c.b1[i])));
            row.extend(self.curves.iter().map(|c| Cell::from(c.b2[i])));
            row.push(Cell::from(self.uncoord_n1[i]));
            row.extend(self.curves.iter().map(|c| Cell::from(c.uncoord[i])));
            row.extend(self.curves.iter().map(|c| Cell::from(c.sim.half_width[i])));
            t.push(row);
        }
        t
    }

    pub fn summary(&self) -> Vec<String> {
        self.curves
            .iter()
            .map(|c| match c.gain_db() {
                Some(g) => format!("N={}: coordinated gain at outage 0.1 = {g:.2} dB", c.n),
                None => format!("N={}: outage 0.1 not reached", c.n),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Point {
    pub rd_norm: f64,
    pub r_d: f64,
    pub theta0_db: f64,
    pub sim_outage: f64,
    pub ci_halfwidth: f64,
    pub b2_outage: f64,
    pub b1_outage: f64,
    pub uncoord_outage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3 {
    pub n: u32,
    pub points: Vec<Fig3Point>,
}

pub fn fig3(cfg: &ExperimentConfig) -> RunResult<Fig3> {
    let n = cfg.n_sc;
    let thetas: Vec<f64> = cfg.theta0_db_list.iter().map(|&d| db_to_linear(d)).collect();
    let quad = QuadratureSpec::default();
    let mut points = Vec::new();
    for rd_norm in cfg.rd_norm_grid() {
        let r_d = rd_norm * cfg.mean_ap_distance();
        let sim = d2d_core::run_d2d_batch(&d2d_batch(cfg, n, ScheduleMode::Coordinated, r_d)?, &thetas, cfg.trials)?;
        let b2 = analytic_curve(cfg, n, ScheduleMode::Coordinated, CellApprox::B2, r_d, &thetas, &quad)?;
        let b1 = analytic_curve(cfg, n, ScheduleMode::Coordinated, CellApprox::B1, r_d, &thetas, &quad)?;
        let un = analytic_curve(cfg, n, ScheduleMode::Uncoordinated, CellApprox::B2, r_d, &thetas, &quad)?;
        for (i, &theta0_db) in cfg.theta0_db_list.iter().enumerate() {
            points.push(Fig3Point {
                rd_norm,
                r_d,
                theta0_db,
                sim_outage: 1.0 - sim.survival[i],
                ci_halfwidth: sim.half_width[i],
                b2_outage: 1.0 - b2[i],
                b1_outage: 1.0 - b1[i],
                uncoord_outage: 1.0 - un[i],
            });
        }
    }
    Ok(Fig3 { n, points })
}

impl Fig3 {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut t = Table::new(
            "fig3/v1",
            &[
                "rd_dist",
                "rd_norm",
                "theta0_db",
                "sim_coord_outage",
                "ci_halfwidth",
                "ana_coord_B2_outage",
                "ana_coord_B1_outage",
                "ana_uncoord_outage",
            ],
        );
        t.comment(cfg.to_string());
        t.comment(format!("N={}; rd_norm = rd_dist * 2 sqrt(lambda_a); outages are P(SIR < theta0)", self.n));
        for p in &self.points {
            t.push(vec![
                p.r_d.into(),
                p.rd_norm.into(),
                p.theta0_db.into(),
                p.sim_outage.into(),
                p.ci_halfwidth.into(),
                p.b2_outage.into(),
                p.b1_outage.into(),
                p.uncoord_outage.into(),
            ]);
        }
        t
    }

    /// Points at one threshold, ordered by distance.
    pub fn at_theta(&self, theta0_db: f64) -> Vec<&Fig3Point> {
        self.points.iter().filter(|p| p.theta0_db == theta0_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Point {
    pub rd_norm: f64,
    pub r_d: f64,
    pub coord: RateBreakdown<f64>,
    pub uncoord: RateBreakdown<f64>,
    pub single: RateBreakdown<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4 {
    pub baseline: f64,
    pub points: Vec<Fig4Point>,
    pub coord_max: BeneficialDistance<f64>,
    pub uncoord_max: BeneficialDistance<f64>,
    pub single_max: BeneficialDistance<f64>,
}

pub fn fig4(cfg: &ExperimentConfig) -> RunResult<Fig4> {
    let cache = cellular_cache(cfg);
    let base = rate_params(cfg)?;
    let coord = base.with_mode(ScheduleMode::Coordinated);
    let uncoord = base.with_mode(ScheduleMode::Uncoordinated);
    let single = base.with_mode(ScheduleMode::Coordinated).with_n_range(1, 1);
    let baseline = scenario_baseline(&base, &cache)?;
    let mut points = Vec::new();
    for rd_norm in cfg.rd_norm_grid() {
        let r_d = rd_norm * cfg.mean_ap_distance();
        points.push(Fig4Point {
            rd_norm,
            r_d,
            coord: optimize_subchannels(&coord.with_r_d(r_d), &cache)?,
            uncoord: optimize_subchannels(&uncoord.with_r_d(r_d), &cache)?,
            single: average_rate(&single.with_r_d(r_d), 1, &cache)?,
        });
    }
    let bracket = default_bracket(cfg.lambda_a);
    Ok(Fig4 {
        baseline,
        points,
        coord_max: max_beneficial_distance(&coord, bracket, &cache)?,
        uncoord_max: max_beneficial_distance(&uncoord, bracket, &cache)?,
        single_max: max_beneficial_distance(&single, bracket, &cache)?,
    })
}

impl Fig4 {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut t = Table::new(
            "fig4/v1",
            &[
                "rd_dist",
                "rd_norm",
                "rate_coord_bpshz",
                "n_opt_coord",
                "rate_uncoord_bpshz",
                "n_opt_uncoord",
                "rate_n1_bpshz",
                "rate_baseline_bpshz",
            ],
        );
        t.comment(cfg.to_string());
        t.comment(format!("eta={} theta0_db={} log_base={}", cfg.eta_or_fair(), cfg.theta_db, cfg.log_base));
        for p in &self.points {
            t.push(vec![
                p.r_d.into(),
                p.rd_norm.into(),
                p.coord.r_total.into(),
                p.coord.n_opt.into(),
                p.uncoord.r_total.into(),
                p.uncoord.n_opt.into(),
                p.single.r_total.into(),
                self.baseline.into(),
            ]);
        }
        t
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let unit = cfg.mean_ap_distance();
        let line = |name: &str, b: &BeneficialDistance<f64>| {
            format!(
                "{name}: max beneficial rd = {:.4} ({:.3} of mean AP distance){}",
                b.r_d,
                b.r_d / unit,
                crossing_note(b.crossing)
            )
        };
        vec![
            line("coordinated", &self.coord_max),
            line("uncoordinated", &self.uncoord_max),
            line("N=1", &self.single_max),
            format!("coordinated / uncoordinated = {:.4}", self.coord_max.r_d / self.uncoord_max.r_d),
        ]
    }
}

pub fn crossing_note(c: Crossing) -> &'static str {
    match c {
        Crossing::Found => "",
        Crossing::BelowBracket => " [below bracket]",
        Crossing::AboveBracket => " [above bracket]",
    }
}

pub fn crossing_name(c: Crossing) -> &'static str {
    match c {
        Crossing::Found => "found",
        Crossing::BelowBracket => "below_bracket",
        Crossing::AboveBracket => "above_bracket",
    }
}
