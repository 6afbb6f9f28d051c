//! Monte-Carlo study of the averaged and two-step regression quantiles:
//! simulate the linear model, estimate the error quantile function and its
//! inverse by each method, and aggregate the curves over replications.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rqproc_core::model::order_statistic_process;
use rqproc_core::{
    averaged_rq_process, generate_design, invert_process, sample_errors, two_step, ErrorDist, ProcessKind,
    QuantileProcess, RegressionData,
};

use crate::error::{CliError, Result};

/// Error distribution of the simulated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistConfig {
    Normal,
    Cauchy,
    /// GEV with CDF `exp(−(1+ξz)^{−1/ξ})`, `shape` = ξ.
    Gev {
        shape: f64,
    },
}

impl DistConfig {
    pub fn error_dist(self) -> ErrorDist {
        match self {
            DistConfig::Normal => ErrorDist::Normal,
            DistConfig::Cauchy => ErrorDist::Cauchy,
            DistConfig::Gev { shape } => ErrorDist::Gev { shape },
        }
    }
}

/// Shape convention of the GEV family, recorded in run manifests.
pub const GEV_CONVENTION: &str = "xi: F(z) = exp(-(1 + xi z)^(-1/xi)), xi < 0 bounded above";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub beta0: f64,
    pub beta: Vec<f64>,
    /// Uniform range of each covariate before recentring.
    pub covariate_ranges: Vec<(f64, f64)>,
    pub error_dist: DistConfig,
    pub replications: usize,
    pub seed: u64,
    pub lambda_list: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// Number of points of the z-grid for the distribution-function curves.
    pub z_points: usize,
    /// Draw the design once and keep it across replications.
    pub fixed_design: bool,
}

/// Replications are resampled after a numerical failure, at most this
/// fraction of the total (rounded up).
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
const MAX_ATTEMPTS: u64 = 16;
const DESIGN_STREAM: u64 = u64::MAX;

impl SimConfig {
    /// n = 25, β₀ = 5, β = (−3, 2), covariates U(0,4) and U(−4,2),
    /// λ ∈ {0.5, 0.9}, α-grid 0.05, 0.10, …, 0.95.
    pub fn paper(error_dist: DistConfig, replications: usize, seed: u64) -> Self {
        SimConfig {
            n: 25,
            beta0: 5.0,
            beta: vec![-3.0, 2.0],
            covariate_ranges: vec![(0.0, 4.0), (-4.0, 2.0)],
            error_dist,
            replications,
            seed,
            lambda_list: vec![0.5, 0.9],
            alpha_grid: (1..20).map(|k| k as f64 / 20.0).collect(),
            z_points: 201,
            fixed_design: false,
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(CliError::Usage(m));
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if self.covariate_ranges.len() != self.beta.len() {
            return fail(format!("{} covariate ranges for {} slopes", self.covariate_ranges.len(), self.beta.len()));
        }
        if self.n < self.p() + 1 {
            return fail(format!("n = {} is too small for {} covariates", self.n, self.p()));
        }
        if self.alpha_grid.is_empty()
            || self.alpha_grid.iter().any(|&a| !(a > 0.0 && a < 1.0))
            || self.alpha_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return fail("alpha grid must be strictly increasing inside (0,1)".into());
        }
        if let Some(&l) = self.lambda_list.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
            return fail(format!("lambda = {l} is outside (0,1)"));
        }
        if self.z_points < 2 {
            return fail("z grid needs at least 2 points".into());
        }
        if let DistConfig::Gev { shape } = self.error_dist {
            if !shape.is_finite() {
                return fail("GEV shape must be finite".into());
            }
        }
        Ok(())
    }

    /// Method labels in curve order: `avg`, `twostep_<λ>`…, `errors`.
    pub fn method_labels(&self) -> Vec<String> {
        let mut labels = vec!["avg".to_owned()];
        labels.extend(self.lambda_list.iter().map(|l| format!("twostep_{l}")));
        labels.push("errors".to_owned());
        labels
    }

    /// 201 (by default) equally spaced points from the true 0.5% to the
    /// true 99.5% error quantile.
    pub fn z_grid(&self) -> Vec<f64> {
        let d = self.error_dist.error_dist();
        let (a, b) = (d.quantile(0.005), d.quantile(0.995));
        let m = self.z_points - 1;
        (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
    }

    pub fn max_failures(&self) -> usize {
        (MAX_FAILURE_FRACTION * self.replications as f64).ceil() as usize
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One simulated data set: the model data, its true errors and the shift
/// `β₀ + x̄ᵀβ` that maps intercept-type estimates onto the error scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub data: RegressionData,
    pub errors: Vec<f64>,
    pub shift: f64,
}

/// Data of replication `rep`, resampling attempt `attempt`.
pub fn simulate_data(cfg: &SimConfig, rep: u64, attempt: u64) -> Result<SimulatedData> {
    let mut rng = rng_for(cfg.seed, rep | attempt << 40);
    let rows = if cfg.fixed_design {
        generate_design(&cfg.covariate_ranges, cfg.n, &mut rng_for(cfg.seed, DESIGN_STREAM))
    } else {
        generate_design(&cfg.covariate_ranges, cfg.n, &mut rng)
    };
    let errors = sample_errors(cfg.error_dist.error_dist(), cfg.n, &mut rng);
    let y = rows
        .iter()
        .zip(&errors)
        .map(|(x, e)| cfg.beta0 + x.iter().zip(&cfg.beta).map(|(x, b)| x * b).sum::<f64>() + e)
        .collect();
    let xbar: Vec<f64> = (0..cfg.p()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / cfg.n as f64).collect();
    let shift = cfg.beta0 + xbar.iter().zip(&cfg.beta).map(|(x, b)| x * b).sum::<f64>();
    Ok(SimulatedData { data: RegressionData::from_rows(&rows, y)?, errors, shift })
}

/// Recentred estimates of one replication, as monotone step processes in
/// method-label order.
pub fn estimate_processes(cfg: &SimConfig, sim: &SimulatedData) -> Result<Vec<QuantileProcess>> {
    let mut out = Vec::with_capacity(cfg.lambda_list.len() + 2);
    out.push(averaged_rq_process(&sim.data)?.affine(1.0, -sim.shift));
    for &l in &cfg.lambda_list {
        out.push(two_step(&sim.data, l)?.process().affine(1.0, -sim.shift));
    }
    out.push(order_statistic_process(&sim.errors, 0.0, ProcessKind::Empirical)?);
    Ok(out)
}

/// Curves of one replication: `quantiles[method][alpha]`, `cdfs[method][z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub quantiles: Vec<Vec<f64>>,
    pub cdfs: Vec<Vec<f64>>,
    /// Failed attempts before this replication succeeded.
    pub failures: usize,
}

fn resamplable(e: &CliError) -> bool {
    use rqproc_core::Error as E;
    matches!(e, CliError::Core(E::SingularBasis { .. } | E::PivotCycle { .. } | E::RankDeficient { .. }))
}

/// Runs `f` on the data of replication `rep`, resampling after numerical
/// failures of the kind a degenerate draw can cause.
pub fn with_resampling<T>(
    cfg: &SimConfig,
    rep: u64,
    mut f: impl FnMut(&SimulatedData) -> Result<T>,
) -> Result<(T, usize)> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        match simulate_data(cfg, rep, attempt).and_then(|sim| f(&sim)) {
            Ok(v) => return Ok((v, attempt as usize)),
            Err(e) if resamplable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn replication(cfg: &SimConfig, z_grid: &[f64], rep: u64) -> Result<Replication> {
    let ((quantiles, cdfs), failures) = with_resampling(cfg, rep, |sim| {
        let procs = estimate_processes(cfg, sim)?;
        let mut quantiles = Vec::with_capacity(procs.len());
        let mut cdfs = Vec::with_capacity(procs.len());
        for q in &procs {
            quantiles
                .push(cfg.alpha_grid.iter().map(|&a| q.evaluate_left(a)).collect::<rqproc_core::Result<Vec<_>>>()?);
            let f = invert_process(q, true)?;
            cdfs.push(z_grid.iter().map(|&z| f.cdf(z)).collect());
        }
        Ok((quantiles, cdfs))
    })?;
    Ok(Replication { quantiles, cdfs, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCurve {
    pub label: String,
    pub mean: Vec<f64>,
    /// Pointwise 5% Monte-Carlo quantile.
    pub lo: Vec<f64>,
    /// Pointwise 95% Monte-Carlo quantile.
    pub hi: Vec<f64>,
}

/// Curves of all methods over one grid, with the true curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveBundle {
    pub grid: Vec<f64>,
    pub truth: Vec<f64>,
    pub methods: Vec<MethodCurve>,
}

impl CurveBundle {
    pub fn method(&self, label: &str) -> Option<&MethodCurve> {
        self.methods.iter().find(|m| m.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    /// Quantile curves over the α-grid.
    pub quantile: CurveBundle,
    /// Distribution-function curves over the z-grid.
    pub cdf: CurveBundle,
    pub failures: usize,
    pub warnings: Vec<String>,
}

/// Sample quantile with linear interpolation between order statistics
/// (`(m−1)u` positioning).
fn percentile(sorted: &[f64], u: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * u;
    let k = h.floor() as usize;
    match sorted.get(k + 1) {
        Some(&next) => sorted[k] + (h - k as f64) * (next - sorted[k]),
        None => sorted[k],
    }
}

fn aggregate(per_rep: &[&Vec<Vec<f64>>], labels: &[String], grid: Vec<f64>, truth: Vec<f64>) -> CurveBundle {
    let reps = per_rep.len() as f64;
    let methods = labels
        .iter()
        .enumerate()
        .map(|(m, label)| {
            let mut curve = MethodCurve { label: label.clone(), mean: vec![], lo: vec![], hi: vec![] };
            let mut column = Vec::with_capacity(per_rep.len());
            for g in 0..grid.len() {
                column.clear();
                column.extend(per_rep.iter().map(|r| r[m][g]));
                // summed in replication order, so the mean does not depend on scheduling
                curve.mean.push(column.iter().sum::<f64>() / reps);
                column.sort_by(f64::total_cmp);
                curve.lo.push(percentile(&column, 0.05));
                curve.hi.push(percentile(&column, 0.95));
            }
            curve
        })
        .collect();
    CurveBundle { grid, truth, methods }
}

/// Thread count from `RQPROC_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var("RQPROC_THREADS").ok()?.trim().parse().ok().filter(|&k| k > 0)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k).build().expect("thread pool").install(f),
        None => f(),
    }
}

/// Runs the study with parallelism capped by `RQPROC_THREADS`.
pub fn run_study(cfg: &SimConfig) -> Result<StudyResult> {
    run_study_with_threads(cfg, thread_limit())
}

/// Runs the study on `threads` workers (`None`: rayon's default). The
/// result does not depend on the thread count.
pub fn run_study_with_threads(cfg: &SimConfig, threads: Option<usize>) -> Result<StudyResult> {
    cfg.validate()?;
    let z_grid = cfg.z_grid();
    let reps: Vec<Replication> = in_pool(threads, || {
        (0..cfg.replications as u64).into_par_iter().map(|r| replication(cfg, &z_grid, r)).collect::<Result<Vec<_>>>()
    })?;
    let failures: usize = reps.iter().map(|r| r.failures).sum();
    if failures > cfg.max_failures() {
        return Err(CliError::TooManyFailures { failures, cap: cfg.max_failures() });
    }
    let mut warnings = Vec::new();
    if failures > 0 {
        warnings.push(format!("{failures} replications resampled after numerical failures"));
    }
    let labels = cfg.method_labels();
    let dist = cfg.error_dist.error_dist();
    let q_truth = cfg.alpha_grid.iter().map(|&a| dist.quantile(a)).collect();
    let f_truth = z_grid.iter().map(|&z| dist.cdf(z)).collect();
    let quantile =
        aggregate(&reps.iter().map(|r| &r.quantiles).collect::<Vec<_>>(), &labels, cfg.alpha_grid.clone(), q_truth);
    let cdf = aggregate(&reps.iter().map(|r| &r.cdfs).collect::<Vec<_>>(), &labels, z_grid, f_truth);
    Ok(StudyResult { quantile, cdf, failures, warnings })
}

/// `sup_α |B̃ₙ(α; λ) − B̄ₙ(α)|` over `grid`.
pub fn two_step_gap(data: &RegressionData, lambda: f64, grid: &[f64]) -> Result<f64> {
    let avg = averaged_rq_process(data)?;
    let ts = two_step(data, lambda)?.process();
    let mut sup: f64 = 0.0;
    for &a in grid {
        sup = sup.max((ts.evaluate_left(a)? - avg.evaluate_left(a)?).abs());
    }
    Ok(sup)
}

/// Per-replication `sup_α |B̃ₙ(α; λ) − B̄ₙ(α)|` for the model of `cfg`.
pub fn gap_study(cfg: &SimConfig, lambda: f64, grid: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    let gaps: Vec<(f64, usize)> = in_pool(thread_limit(), || {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|r| with_resampling(cfg, r, |sim| two_step_gap(&sim.data, lambda, grid)))
            .collect::<Result<Vec<_>>>()
    })?;
    let failures: usize = gaps.iter().map(|g| g.1).sum();
    if failures > cfg.max_failures() {
        return Err(CliError::TooManyFailures { failures, cap: cfg.max_failures() });
    }
    Ok(gaps.into_iter().map(|g| g.0).collect())
}
