//! Command-line interface. Data go to files only; warnings go to stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rqproc_core::{
    averaged_rq_process, expected_shortfall, invert_process, rq_process, solve_rq, two_step, QuantileProcess,
};

use crate::error::{CliError, Result};
use crate::io;
use crate::manifest::{RunManifest, RNG_NAME};
use crate::sim::{self, CurveBundle, DistConfig, SimConfig, GEV_CONVENTION};

#[derive(Debug, Parser)]
#[command(
    name = "rqproc",
    version,
    about = "Regression quantile processes, averaged regression quantiles and expected shortfall"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regression α-quantile: coefficients, basis and objective.
    Fit(FitArgs),
    /// Regression quantile process over α ∈ (0,1) (value = intercept).
    Process(DataArgs),
    /// Averaged regression quantile process B̄ₙ(α).
    Average(DataArgs),
    /// Averaged two-step regression quantile process B̃ₙ(α) with φ_λ slopes.
    Twostep(TwoStepArgs),
    /// Invert a process table (alpha_lo, alpha_hi, value) into (z, F) pairs.
    Invert(InvertArgs),
    /// Expected α-shortfall of B̄ₙ or B̃ₙ.
    Shortfall(ShortfallArgs),
    /// Monte-Carlo study of the estimators under the simulated linear model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// CSV with a header row; one response column, the rest are covariates.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column [default: first column].
    #[arg(long)]
    pub response_col: Option<String>,
    /// Output CSV; the manifest is written to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TwoStepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: DataArgs,
    /// Score parameter of the R-estimator.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct InvertArgs {
    /// Process table as written by `process`, `average` or `twostep`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Avg,
    Twostep,
}

#[derive(Debug, Args, Serialize)]
pub struct ShortfallArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: DataArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "avg")]
    pub method: Method,
    /// Score parameter for `--method twostep`.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Normal,
    Cauchy,
    Gev,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "normal")]
    pub dist: Dist,
    /// GEV shape ξ in F(z) = exp(−(1+ξz)^(−1/ξ)).
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub gev_shape: f64,
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    /// Run 10 000 replications (overrides --reps).
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Score parameters of the two-step estimators (repeatable).
    #[arg(long = "lambda", default_values_t = [0.5, 0.9])]
    pub lambdas: Vec<f64>,
    /// Keep one design for all replications instead of redrawing it.
    #[arg(long)]
    pub fixed_design: bool,
    /// Re-run the configuration recorded in a simulate manifest; the other
    /// model flags are ignored.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl SimulateArgs {
    pub fn to_config(&self) -> SimConfig {
        let dist = match self.dist {
            Dist::Normal => DistConfig::Normal,
            Dist::Cauchy => DistConfig::Cauchy,
            Dist::Gev => DistConfig::Gev { shape: self.gev_shape },
        };
        let reps = if self.full { 10_000 } else { self.reps };
        let mut cfg = SimConfig::paper(dist, reps, self.seed);
        cfg.n = self.n;
        cfg.lambda_list = self.lambdas.clone();
        cfg.fixed_design = self.fixed_design;
        cfg
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_outputs(
    out: &Path,
    table: (Vec<String>, Vec<Vec<String>>),
    command: &str,
    config: &impl Serialize,
) -> Result<()> {
    io::write_csv(out, &table.0, &table.1)?;
    let manifest = RunManifest::new(command, serde_json::to_value(config).expect("arguments are serializable"));
    manifest.write(&manifest_path(out))
}

fn load(args: &DataArgs) -> Result<rqproc_core::RegressionData> {
    Ok(io::read_regression(&args.data, args.response_col.as_deref())?.0)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let sol = solve_rq(&load(&a.io)?, a.alpha)?;
            write_outputs(&a.io.out, io::solution_table(&sol), "fit", &a)
        }
        Command::Process(a) => {
            let q = rq_process(&load(&a)?)?;
            write_outputs(&a.out, io::process_table(&q), "process", &a)
        }
        Command::Average(a) => {
            let q = averaged_rq_process(&load(&a)?)?;
            write_outputs(&a.out, io::process_table(&q), "average", &a)
        }
        Command::Twostep(a) => {
            let fit = two_step(&load(&a.io)?, a.lambda)?;
            write_outputs(&a.io.out, io::two_step_table(&fit), "twostep", &a)
        }
        Command::Invert(a) => {
            let q = io::read_process(&a.data)?.into_monotone()?;
            let f = invert_process(&q, true)?;
            write_outputs(&a.out, io::cdf_table(&f), "invert", &a)
        }
        Command::Shortfall(a) => {
            let data = load(&a.io)?;
            let q: QuantileProcess = match a.method {
                Method::Avg => averaged_rq_process(&data)?,
                Method::Twostep => two_step(&data, a.lambda)?.process(),
            };
            let report = expected_shortfall(&q, a.alpha)?;
            write_outputs(&a.io.out, io::shortfall_table(&report), "shortfall", &a)
        }
        Command::Simulate(a) => simulate(&a),
    }
}

fn curve_table(bundle: &CurveBundle, grid_name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec![grid_name.to_owned(), "true".to_owned()];
    for m in &bundle.methods {
        header.extend(["mean", "lo", "hi"].map(|s| format!("{}_{s}", m.label)));
    }
    let rows = (0..bundle.grid.len())
        .map(|g| {
            let mut row = vec![io::fmt_f64(bundle.grid[g]), io::fmt_f64(bundle.truth[g])];
            for m in &bundle.methods {
                row.extend([m.mean[g], m.lo[g], m.hi[g]].map(io::fmt_f64));
            }
            row
        })
        .collect();
    (header, rows)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = match &a.from_manifest {
        Some(path) => {
            let m = RunManifest::read(path)?;
            serde_json::from_value(m.config.get("sim").cloned().unwrap_or_default())
                .map_err(|e| CliError::Format { path: path.clone(), message: format!("config.sim: {e}") })?
        }
        None => a.to_config(),
    };
    let study = sim::run_study(&cfg)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io { path: a.out_dir.clone(), source })?;
    let (h, rows) = curve_table(&study.quantile, "alpha");
    io::write_csv(&a.out_dir.join("quantile_curves.csv"), &h, &rows)?;
    let (h, rows) = curve_table(&study.cdf, "z");
    io::write_csv(&a.out_dir.join("cdf_curves.csv"), &h, &rows)?;

    let mut config = serde_json::json!({ "sim": cfg });
    if let DistConfig::Gev { .. } = cfg.error_dist {
        config["gev_convention"] = GEV_CONVENTION.into();
    }
    let mut manifest = RunManifest::new("simulate", config);
    manifest.seed = Some(cfg.seed);
    manifest.rng = Some(RNG_NAME.to_owned());
    manifest.warnings = study.warnings.clone();
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    manifest.write(&a.out_dir.join("manifest.json"))
}
