//! Data model shared by the solvers: regression data, regression quantile
//! solutions, piecewise-constant processes over α and step distribution
//! functions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative pivot tolerance for the full-rank check on the design.
pub const RANK_TOL: f64 = 1e-10;

/// Design matrix with an intercept column, plus the response.
///
/// The design is stored row-major, `n × (p+1)`, first column identically 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    n: usize,
    p: usize,
    design: Vec<f64>,
    response: Vec<f64>,
}

impl RegressionData {
    /// Builds data from covariate rows (without intercept). Every row must
    /// have the same length `p`; an intercept column is prepended.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], response: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { what: "number of observations", expected: 1, found: 0 });
        }
        if response.len() != n {
            return Err(Error::DimensionMismatch { what: "response length", expected: n, found: response.len() });
        }
        let p = rows[0].as_ref().len();
        let mut design = Vec::with_capacity(n * (p + 1));
        for row in rows {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::DimensionMismatch { what: "covariate row length", expected: p, found: row.len() });
            }
            design.push(1.0);
            design.extend_from_slice(row);
        }
        Self::from_design(n, p, design, response)
    }

    /// Intercept-only data (`p = 0`).
    pub fn intercept_only(response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        let empty: Vec<[f64; 0]> = (0..n).map(|_| []).collect();
        Self::from_rows(&empty, response)
    }

    fn from_design(n: usize, p: usize, design: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        if design.iter().chain(&response).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "regression data" });
        }
        let m = p + 1;
        let rank = linalg::rank(&design, n, m, RANK_TOL);
        if rank < m {
            return Err(Error::RankDeficient { rank, required: m });
        }
        Ok(RegressionData { n, p, design, response })
    }

    /// Same design, new response. The design was validated already.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Self> {
        if response.len() != self.n {
            return Err(Error::DimensionMismatch { what: "response length", expected: self.n, found: response.len() });
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "response" });
        }
        Ok(RegressionData { response, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of design columns, `p + 1`.
    pub fn dim(&self) -> usize {
        self.p + 1
    }

    /// Row `i` of the design, `(1, x_i1, …, x_ip)`.
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.dim();
        &self.design[i * m..(i + 1) * m]
    }

    /// Row-major design with intercept column.
    pub fn design(&self) -> &[f64] {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Column sums of the design, `X*ᵀ 1`.
    pub fn column_sums(&self) -> Vec<f64> {
        let m = self.dim();
        let mut s = alloc::vec![0.0; m];
        for i in 0..self.n {
            for (acc, x) in s.iter_mut().zip(self.row(i)) {
                *acc += x;
            }
        }
        s
    }

    /// Column means `x̄*` (first entry 1).
    pub fn mean_row(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut s = self.column_sums();
        s.iter_mut().for_each(|v| *v /= n);
        s[0] = 1.0;
        s
    }

    /// `max(1, max |Y_i|)`, the scale for residual tolerances.
    pub fn scale(&self) -> f64 {
        self.response.iter().fold(1.0_f64, |a, y| a.max(libm::fabs(*y)))
    }

    /// Residuals `Y − X* b`.
    pub fn residuals(&self, coefficients: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.response[i] - linalg::dot(self.row(i), coefficients)).collect()
    }
}

/// Check loss `ρ_α(r) = α r⁺ + (1−α) r⁻`.
pub fn check_loss(alpha: f64, r: f64) -> f64 {
    if r >= 0.0 {
        alpha * r
    } else {
        (alpha - 1.0) * r
    }
}

/// A regression α-quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct RQSolution {
    pub alpha: f64,
    /// Intercept first.
    pub coefficients: Vec<f64>,
    /// Sorted indices of the p+1 interpolated observations.
    pub basis: Vec<usize>,
    /// `Σ ρ_α(Y_i − x_i*ᵀ b)` at the solution.
    pub objective: f64,
}

impl RQSolution {
    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[1..]
    }
}

/// Which estimator produced a process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessKind {
    /// Intercept component of the regression quantile.
    RegressionQuantile,
    /// Averaged regression quantile `x̄*ᵀ β̂*(α)`.
    Averaged,
    /// Averaged two-step regression quantile with R-estimator score `φ_λ`.
    TwoStep {
        lambda: f64,
    },
    /// Sample quantile function of a plain sample.
    Empirical,
    Custom,
}

impl ProcessKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProcessKind::RegressionQuantile => "rq",
            ProcessKind::Averaged => "avg",
            ProcessKind::TwoStep { .. } => "twostep",
            ProcessKind::Empirical => "empirical",
            ProcessKind::Custom => "custom",
        }
    }
}

/// Per-interval payload for processes built from regression quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMeta {
    pub coefficients: Vec<f64>,
    pub basis: Vec<usize>,
}

/// A piecewise-constant function of α on (0,1).
///
/// `values[k]` holds on `(breakpoints[k-1], breakpoints[k])` with the
/// conventions `breakpoints[-1] = 0` and `breakpoints[J] = 1`. At a
/// breakpoint the process takes the value of the interval to its right.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileProcess {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    monotone: bool,
    kind: ProcessKind,
    meta: Vec<IntervalMeta>,
}

impl QuantileProcess {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, kind: ProcessKind) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::DimensionMismatch {
                what: "process values",
                expected: breakpoints.len() + 1,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "process values" });
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b < 1.0) {
                return Err(Error::OutOfRange { what: "breakpoint", value: b });
            }
            prev = b;
        }
        Ok(QuantileProcess { breakpoints, values, monotone: false, kind, meta: Vec::new() })
    }

    /// A process with one value on all of (0,1).
    pub fn constant(value: f64, kind: ProcessKind) -> Self {
        QuantileProcess { breakpoints: Vec::new(), values: alloc::vec![value], monotone: true, kind, meta: Vec::new() }
    }

    pub(crate) fn with_meta(mut self, meta: Vec<IntervalMeta>) -> Self {
        debug_assert_eq!(meta.len(), self.values.len());
        self.meta = meta;
        self
    }

    /// Checks that values are nondecreasing and sets the `monotone` flag.
    pub fn into_monotone(mut self) -> Result<Self> {
        if let Some(k) = self.values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NotMonotone { index: k + 1 });
        }
        self.monotone = true;
        Ok(self)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn meta(&self) -> &[IntervalMeta] {
        &self.meta
    }

    pub fn interval_count(&self) -> usize {
        self.values.len()
    }

    /// `(lo, hi)` bounds of interval `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { self.breakpoints[k - 1] };
        let hi = self.breakpoints.get(k).copied().unwrap_or(1.0);
        (lo, hi)
    }

    /// Index of the interval holding `alpha`, right-continuous at breakpoints.
    pub fn interval_index(&self, alpha: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= alpha)
    }

    /// Value at `alpha ∈ (0,1)`; a breakpoint takes the right-hand value.
    pub fn evaluate(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange { what: "alpha", value: alpha });
        }
        Ok(self.values[self.interval_index(alpha)])
    }

    /// Left-continuous value at `alpha ∈ (0,1]`: a breakpoint takes the
    /// left-hand value, as in `inf{z : F(z) ≥ α}`.
    pub fn evaluate_left(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange { what: "alpha", value: alpha });
        }
        Ok(self.values[self.breakpoints.partition_point(|&b| b < alpha)])
    }

    /// Value of the last interval, the process at α → 1.
    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("process has at least one interval")
    }

    /// `c·Q + shift` for `c > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = scale * *v + shift);
        out.meta.clear();
        out
    }
}

/// The sample quantile function of `values`: value `v_(k)` on
/// `((k−1)/n, k/n)`. Adjacent order statistics closer than `merge_tol`
/// share one interval.
pub fn order_statistic_process(values: &[f64], merge_tol: f64, kind: ProcessKind) -> Result<QuantileProcess> {
    let n = values.len();
    if n == 0 {
        return Err(Error::DimensionMismatch { what: "sample size", expected: 1, found: 0 });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut breakpoints = Vec::new();
    let mut vals = alloc::vec![sorted[0]];
    for k in 1..n {
        if sorted[k] - *vals.last().unwrap() > merge_tol {
            breakpoints.push(k as f64 / n as f64);
            vals.push(sorted[k]);
        }
    }
    QuantileProcess::new(breakpoints, vals, kind)?.into_monotone()
}

/// A discrete distribution function: atoms with cumulative probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCDF {
    atoms: Vec<f64>,
    cum_probs: Vec<f64>,
}

impl StepCDF {
    pub(crate) fn from_parts(atoms: Vec<f64>, cum_probs: Vec<f64>) -> Self {
        debug_assert_eq!(atoms.len(), cum_probs.len());
        debug_assert_eq!(cum_probs.last().copied(), Some(1.0));
        StepCDF { atoms, cum_probs }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn cum_probs(&self) -> &[f64] {
        &self.cum_probs
    }

    /// Point masses of the atoms.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cum_probs
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// `F(z)`, right-continuous.
    pub fn cdf(&self, z: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= z);
        if k == 0 {
            0.0
        } else {
            self.cum_probs[k - 1]
        }
    }

    /// Generalized inverse `inf{z : F(z) ≥ u}` for `u ∈ (0,1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cum_probs.partition_point(|&c| c < u);
        self.atoms[k.min(self.atoms.len() - 1)]
    }
}
