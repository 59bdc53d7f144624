use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use d2d_experiments::commands;
use d2d_experiments::config::{ConfigError, ExperimentConfig, Scenario};
use d2d_experiments::figures;
use d2d_experiments::{fmt_g9, RunResult, Table};

#[derive(Parser, Debug)]
#[command(name = "d2d", version, about = "D2D underlay experiments: simulation, analysis, rate optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo SIR ccdf of the typical D2D link.
    Simulate(Opts),
    /// Analytic SIR ccdfs (uncoordinated and coordinated).
    Analytic(Opts),
    /// Simulated co-channel interferer densities against the model.
    Densities(Opts),
    /// Average user rate at a fixed subchannel count.
    Rate(Opts),
    /// Rate-maximizing subchannel count and maximum beneficial link distance.
    Optimize(Opts),
    /// Regenerate one of the figure sweeps.
    Figure {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Approx {
    B1,
    B2,
    #[value(name = "b1-literal")]
    B1Literal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Coord,
    Uncoord,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    cell_approx: Option<Approx>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda_a: Option<f64>,
    #[arg(long)]
    lambda_d: Option<f64>,
    #[arg(long)]
    lambda_c: Option<f64>,
    #[arg(long)]
    n_sc: Option<u32>,
    #[arg(long)]
    rd: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_db: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Expected AP count of the D2D simulation window.
    #[arg(long)]
    window_aps: Option<f64>,
    /// Extra `key=value` settings, as in the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Opts {
    fn build(&self, default: Scenario) -> Result<ExperimentConfig, ConfigError> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?,
            None => String::new(),
        };
        let mut cfg = ExperimentConfig::from_text(&text, default)?;
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::new("set", format!("expected KEY=VALUE, got `{kv}`")))?;
            cfg.set(k, v)?;
        }
        let f = |v: Option<f64>| v.map(|x| x.to_string());
        let overrides = [
            ("seed", self.seed.map(|x| x.to_string())),
            ("trials", self.trials.map(|x| x.to_string())),
            ("alpha", f(self.alpha)),
            ("lambda_a", f(self.lambda_a)),
            ("lambda_d", f(self.lambda_d)),
            ("lambda_c", f(self.lambda_c)),
            ("n_sc", self.n_sc.map(|x| x.to_string())),
            ("rd", f(self.rd)),
            ("theta_db", f(self.theta_db)),
            ("window_aps", f(self.window_aps)),
            (
                "cell_approx",
                self.cell_approx.map(|a| {
                    match a {
                        Approx::B1 => "b1",
                        Approx::B2 => "b2",
                        Approx::B1Literal => "b1-literal",
                    }
                    .to_string()
                }),
            ),
            (
                "mode",
                self.mode.map(|m| {
                    match m {
                        Mode::Coord => "coord",
                        Mode::Uncoord => "uncoord",
                    }
                    .to_string()
                }),
            ),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> RunResult<()> {
    let (table, cfg, notes) = match cli.command {
        Command::Simulate(o) => {
            let cfg = o.build(Scenario::Custom)?;
            let ccdf = commands::simulate(&cfg)?;
            (commands::simulate_table(&cfg, &ccdf), cfg, vec![])
        }
        Command::Analytic(o) => {
            let cfg = o.build(Scenario::Custom)?;
            (commands::analytic(&cfg)?.table(&cfg), cfg, vec![])
        }
        Command::Densities(o) => {
            let cfg = o.build(Scenario::Densities)?;
            let d = commands::densities(&cfg)?;
            (d.table(&cfg), cfg, vec![])
        }
        Command::Rate(o) => {
            let cfg = o.build(Scenario::Custom)?;
            (commands::rate(&cfg)?.table(&cfg), cfg, vec![])
        }
        Command::Optimize(o) => {
            let cfg = o.build(Scenario::Custom)?;
            let opt = commands::optimize(&cfg)?;
            let note = format!(
                "n_opt = {}, rate = {} b/s/Hz, max beneficial rd = {}",
                opt.best.n_opt,
                fmt_g9(opt.best.r_total),
                fmt_g9(opt.max_distance.r_d)
            );
            (opt.table(&cfg), cfg, vec![note])
        }
        Command::Figure { which, opts } => match which {
            Figure::Fig2 => {
                let cfg = opts.build(Scenario::Fig2)?;
                let f = figures::fig2(&cfg)?;
                (f.table(&cfg), cfg, f.summary())
            }
            Figure::Fig3 => {
                let cfg = opts.build(Scenario::Fig3)?;
                (figures::fig3(&cfg)?.table(&cfg), cfg, vec![])
            }
            Figure::Fig4 => {
                let cfg = opts.build(Scenario::Fig4)?;
                let f = figures::fig4(&cfg)?;
                let notes = f.summary(&cfg);
                (f.table(&cfg), cfg, notes)
            }
        },
    };
    emit(&table, &cfg)?;
    for n in notes {
        eprintln!("{n}");
    }
    Ok(())
}

fn emit(table: &Table, cfg: &ExperimentConfig) -> io::Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, table.to_csv_string()),
        None => {
            let mut out = io::stdout().lock();
            table.write_to(&mut out)?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
