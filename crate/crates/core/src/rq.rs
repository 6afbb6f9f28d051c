//! Regression α-quantiles by linear programming.
//!
//! The engine works on the dual program
//!
//! ```text
//! maximize  Yᵀa   subject to  X*ᵀa = (1−α) X*ᵀ1,   a ∈ [0,1]ⁿ
//! ```
//!
//! with a bounded-variable dual simplex. A basis is a set of p+1
//! observations; every other observation sits at a bound (`a_i = 1` above
//! the fit, `a_i = 0` below). The simplex multipliers of a basis are the
//! regression coefficients, the reduced costs are the residuals, and the
//! basic dual values are affine in α: `a_h(α) = g − α d` with
//! `d = X_h^{-T} X*ᵀ1`. Fixed-α solves use long-step (bound flipping) pivots;
//! the process over α is traced by parametric pivots at the α where a basic
//! `a_k` reaches 0 or 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};
use crate::model::{check_loss, IntervalMeta, ProcessKind, QuantileProcess, RQSolution, RegressionData};

/// The path is traced on `[ALPHA_EPS, 1 − ALPHA_EPS]` and extended by constancy.
pub const ALPHA_EPS: f64 = 1e-9;
/// Intervals narrower than this are dropped and their breakpoints merged.
pub const MERGE_TOL: f64 = 1e-12;

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const START_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
struct StatusSet(Vec<u64>);

impl StatusSet {
    fn new(n: usize) -> Self {
        StatusSet(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
}

#[derive(Debug, Clone)]
struct Simplex<'a> {
    data: &'a RegressionData,
    col_sums: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    upper: StatusSet,
    lu: Lu,
    coef: Vec<f64>,
    resid: Vec<f64>,
    g: Vec<f64>,
    d: Vec<f64>,
    pivots: usize,
    cap: usize,
}

impl<'a> Simplex<'a> {
    fn new(data: &'a RegressionData) -> Result<Self> {
        let n = data.n();
        let m = data.dim();
        let basis = linalg::pivot_rows(data.design(), n, m);
        let mut in_basis = vec![false; n];
        basis.iter().for_each(|&i| in_basis[i] = true);
        let mut s = Simplex {
            data,
            col_sums: data.column_sums(),
            basis,
            in_basis,
            upper: StatusSet::new(n),
            lu: Lu::factor(&[1.0], 1).expect("identity"),
            coef: Vec::new(),
            resid: Vec::new(),
            g: Vec::new(),
            d: Vec::new(),
            pivots: 0,
            cap: 200 * n * m + 10_000,
        };
        s.factor()?;
        s.update_primal();
        for i in 0..n {
            if !s.in_basis[i] && s.resid[i] > 0.0 {
                s.upper.set(i, true);
            }
        }
        s.update_duals();
        Ok(s)
    }

    fn factor(&mut self) -> Result<()> {
        let m = self.data.dim();
        let mut a = Vec::with_capacity(m * m);
        for &i in &self.basis {
            a.extend_from_slice(self.data.row(i));
        }
        self.lu = Lu::factor(&a, m).ok_or(Error::SingularBasis { det: 0.0 })?;
        Ok(())
    }

    fn update_primal(&mut self) {
        let y = self.data.response();
        let mut coef: Vec<f64> = self.basis.iter().map(|&i| y[i]).collect();
        self.lu.solve(&mut coef);
        self.resid = self.data.residuals(&coef);
        for &i in &self.basis {
            self.resid[i] = 0.0;
        }
        self.coef = coef;
    }

    fn update_duals(&mut self) {
        let m = self.data.dim();
        let mut rhs = self.col_sums.clone();
        for i in 0..self.data.n() {
            if !self.in_basis[i] && self.upper.get(i) {
                for (r, x) in rhs.iter_mut().zip(self.data.row(i)) {
                    *r -= x;
                }
            }
        }
        self.lu.solve_transpose(&mut rhs);
        let mut d = self.col_sums.clone();
        self.lu.solve_transpose(&mut d);
        debug_assert_eq!(rhs.len(), m);
        self.g = rhs;
        self.d = d;
    }

    fn basic_duals(&self, alpha: f64) -> impl Iterator<Item = f64> + '_ {
        self.g.iter().zip(&self.d).map(move |(g, d)| g - alpha * d)
    }

    /// Replaces basic position `k`. The leaving observation goes to its
    /// upper bound when `to_upper`. `infeasibility` is the amount by which
    /// `a_k` violates that bound; passing it enables bound flipping, so that
    /// observations crossed on the way change sides without entering.
    fn pivot(&mut self, k: usize, to_upper: bool, infeasibility: f64) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.cap {
            return Err(Error::PivotCycle { iterations: self.pivots });
        }
        let m = self.data.dim();
        let sigma = if to_upper { -1.0 } else { 1.0 };
        let mut delta = vec![0.0; m];
        delta[k] = sigma;
        self.lu.solve(&mut delta);

        let mut cands: Vec<(f64, usize, f64)> = Vec::new();
        for j in 0..self.data.n() {
            if self.in_basis[j] {
                continue;
            }
            let v = linalg::dot(self.data.row(j), &delta);
            let up = self.upper.get(j);
            if (up && v > PIVOT_TOL) || (!up && v < -PIVOT_TOL) {
                cands.push(((self.resid[j] / v).max(0.0), j, v));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut slope = infeasibility;
        let mut entering = None;
        for &(_, j, v) in &cands {
            let w = libm::fabs(v);
            if slope - w > PIVOT_TOL {
                slope -= w;
                let up = self.upper.get(j);
                self.upper.set(j, !up);
            } else {
                entering = Some(j);
                break;
            }
        }
        // No entering candidate means an unbounded primal direction, which a
        // full-rank design rules out; it can only come from pivot noise.
        let j = entering.ok_or(Error::PivotCycle { iterations: self.pivots })?;
        let leaving = self.basis[k];
        self.in_basis[leaving] = false;
        self.upper.set(leaving, to_upper);
        self.in_basis[j] = true;
        self.upper.set(j, false);
        self.basis[k] = j;
        self.factor()?;
        self.update_primal();
        self.update_duals();
        Ok(())
    }

    fn solve_at(&mut self, alpha: f64) -> Result<()> {
        let start = self.pivots;
        let n = self.data.n();
        loop {
            let bland = self.pivots - start > 2 * n + 50;
            let mut pick: Option<(usize, bool, f64)> = None;
            for (k, a) in self.basic_duals(alpha).enumerate() {
                let (viol, to_upper) = if a < -FEAS_TOL {
                    (-a, false)
                } else if a > 1.0 + FEAS_TOL {
                    (a - 1.0, true)
                } else {
                    continue;
                };
                let better = match pick {
                    None => true,
                    Some((kk, _, vv)) => {
                        if bland {
                            self.basis[k] < self.basis[kk]
                        } else {
                            viol > vv
                        }
                    }
                };
                if better {
                    pick = Some((k, to_upper, viol));
                }
            }
            match pick {
                None => return Ok(()),
                Some((k, to_upper, viol)) => self.pivot(k, to_upper, viol)?,
            }
        }
    }

    fn solution(&self, alpha: f64) -> RQSolution {
        let mut basis = self.basis.clone();
        basis.sort_unstable();
        RQSolution {
            alpha,
            coefficients: self.coef.clone(),
            basis,
            objective: self.resid.iter().map(|&r| check_loss(alpha, r)).sum(),
        }
    }

    fn slope_tol(&self) -> f64 {
        1e-12 * self.data.n() as f64
    }

    /// Largest α ≥ `cur` up to which the basis stays optimal, with the
    /// position that leaves there and whether it leaves at its upper bound.
    fn exit_up(&self, cur: f64) -> (f64, Option<(usize, bool)>) {
        let tol = self.slope_tol();
        let mut best = (f64::INFINITY, None::<(usize, bool)>);
        for k in 0..self.basis.len() {
            let (g, d) = (self.g[k], self.d[k]);
            let (t, to_upper) = if d > tol {
                (g / d, false)
            } else if d < -tol {
                ((g - 1.0) / d, true)
            } else {
                continue;
            };
            let t = t.max(cur);
            let take = match best.1 {
                None => true,
                Some((kk, _)) => t < best.0 || (t == best.0 && self.basis[k] < self.basis[kk]),
            };
            if take {
                best = (t, Some((k, to_upper)));
            }
        }
        best
    }

    fn exit_down(&self, cur: f64) -> (f64, Option<(usize, bool)>) {
        let tol = self.slope_tol();
        let mut best = (f64::NEG_INFINITY, None::<(usize, bool)>);
        for k in 0..self.basis.len() {
            let (g, d) = (self.g[k], self.d[k]);
            let (t, to_upper) = if d > tol {
                ((g - 1.0) / d, true)
            } else if d < -tol {
                (g / d, false)
            } else {
                continue;
            };
            let t = t.min(cur);
            let take = match best.1 {
                None => true,
                Some((kk, _)) => t > best.0 || (t == best.0 && self.basis[k] < self.basis[kk]),
            };
            if take {
                best = (t, Some((k, to_upper)));
            }
        }
        best
    }

    fn snapshot(&self, lo: f64, hi: f64) -> PathInterval {
        PathInterval {
            n: self.data.n(),
            lo,
            hi,
            basis: self.basis.clone(),
            coefficients: self.coef.clone(),
            g: self.g.clone(),
            d: self.d.clone(),
            upper: self.upper.clone(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "alpha", value: alpha })
    }
}

/// Regression α-quantile: minimizes `Σ ρ_α(Y_i − x_i*ᵀ b)`.
///
/// The solution interpolates the p+1 basis observations. Among multiple
/// optima (possible only at finitely many α, or with ties in the data) the
/// one reached by the pivot rules is returned.
pub fn solve_rq(data: &RegressionData, alpha: f64) -> Result<RQSolution> {
    check_alpha(alpha)?;
    let mut s = Simplex::new(data)?;
    s.solve_at(alpha)?;
    Ok(s.solution(alpha))
}

/// One interval of constancy of `β̂*(α)`.
#[derive(Debug, Clone)]
pub struct PathInterval {
    n: usize,
    lo: f64,
    hi: f64,
    basis: Vec<usize>,
    coefficients: Vec<f64>,
    g: Vec<f64>,
    d: Vec<f64>,
    upper: StatusSet,
}

impl PathInterval {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Basis observations in basis-position order (matches [`Self::basic_slopes`]).
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn sorted_basis(&self) -> Vec<usize> {
        let mut b = self.basis.clone();
        b.sort_unstable();
        b
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Derivatives `â'_i(α)` of the basic rank scores on this interval.
    pub fn basic_slopes(&self) -> Vec<f64> {
        self.d.iter().map(|d| -d).collect()
    }

    /// Rank scores `â(α)` for α in this interval.
    pub fn rank_scores_at(&self, alpha: f64) -> Vec<f64> {
        let mut a: Vec<f64> = (0..self.n).map(|i| if self.upper.get(i) { 1.0 } else { 0.0 }).collect();
        for (k, &i) in self.basis.iter().enumerate() {
            let v = self.g[k] - alpha * self.d[k];
            // pivot noise only; the basic value is in [0,1] on the interval
            a[i] = if (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v) { v.clamp(0.0, 1.0) } else { v };
        }
        a
    }
}

/// The full parametric path of regression quantiles over α ∈ (0,1).
#[derive(Debug, Clone)]
pub struct RqPath {
    n: usize,
    intervals: Vec<PathInterval>,
}

impl RqPath {
    pub fn intervals(&self) -> &[PathInterval] {
        &self.intervals
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.intervals[1..].iter().map(|iv| iv.lo).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Interval holding α (right-continuous at breakpoints).
    pub fn interval_at(&self, alpha: f64) -> &PathInterval {
        let k = self.intervals[1..].partition_point(|iv| iv.lo <= alpha);
        &self.intervals[k]
    }
}

/// Traces the regression quantile path by parametric pivoting, starting from
/// the α = 0.5 solution and walking to `ALPHA_EPS` and `1 − ALPHA_EPS`.
pub fn rq_path(data: &RegressionData) -> Result<RqPath> {
    let n = data.n();
    let mut s0 = Simplex::new(data)?;
    s0.solve_at(START_ALPHA)?;
    let (lo0, leave_lo) = s0.exit_down(START_ALPHA);
    let (hi0, leave_hi) = s0.exit_up(START_ALPHA);
    let stall_cap = 4 * n + 100;

    let mut up = Vec::new();
    {
        let mut s = s0.clone();
        let (mut cur, mut leave) = (hi0, leave_hi);
        let mut stalls = 0;
        while cur < 1.0 - ALPHA_EPS {
            let Some((k, to_upper)) = leave else { break };
            s.pivot(k, to_upper, 0.0)?;
            let (hi, next) = s.exit_up(cur);
            if hi - cur < MERGE_TOL {
                stalls += 1;
                if stalls > stall_cap {
                    return Err(Error::PivotCycle { iterations: s.pivots });
                }
            } else {
                stalls = 0;
            }
            up.push(s.snapshot(cur, hi));
            cur = hi;
            leave = next;
        }
    }
    let mut down = Vec::new();
    {
        let mut s = s0.clone();
        let (mut cur, mut leave) = (lo0, leave_lo);
        let mut stalls = 0;
        while cur > ALPHA_EPS {
            let Some((k, to_upper)) = leave else { break };
            s.pivot(k, to_upper, 0.0)?;
            let (lo, next) = s.exit_down(cur);
            if cur - lo < MERGE_TOL {
                stalls += 1;
                if stalls > stall_cap {
                    return Err(Error::PivotCycle { iterations: s.pivots });
                }
            } else {
                stalls = 0;
            }
            down.push(s.snapshot(lo, cur));
            cur = lo;
            leave = next;
        }
    }

    let mut all: Vec<PathInterval> = down.into_iter().rev().collect();
    all.push(s0.snapshot(lo0, hi0));
    all.extend(up);

    let mut intervals: Vec<PathInterval> = Vec::with_capacity(all.len());
    for mut iv in all {
        iv.lo = iv.lo.max(0.0);
        iv.hi = iv.hi.min(1.0);
        if iv.hi - iv.lo < MERGE_TOL {
            continue;
        }
        if let Some(prev) = intervals.last_mut() {
            prev.hi = iv.lo;
        }
        intervals.push(iv);
    }
    if intervals.is_empty() {
        // Every interval collapsed; only possible with a single exact fit.
        intervals.push(s0.snapshot(0.0, 1.0));
    }
    if intervals[0].lo <= ALPHA_EPS {
        intervals[0].lo = 0.0;
    }
    let last = intervals.len() - 1;
    if intervals[last].hi >= 1.0 - ALPHA_EPS {
        intervals[last].hi = 1.0;
    }
    // Boundary intervals narrower than the tracing margin are artifacts.
    if intervals.len() > 1 && intervals[0].hi <= ALPHA_EPS + MERGE_TOL {
        intervals.remove(0);
        intervals[0].lo = 0.0;
    }
    let last = intervals.len() - 1;
    if last > 0 && intervals[last].lo >= 1.0 - ALPHA_EPS - MERGE_TOL {
        intervals.pop();
        let l = intervals.len() - 1;
        intervals[l].hi = 1.0;
    }
    Ok(RqPath { n, intervals })
}

/// Regression quantile process: intervals of constancy of `β̂*(α)`. The
/// scalar value is the intercept `β̂₀(α)`; coefficients and basis are kept
/// per interval.
pub fn rq_process(data: &RegressionData) -> Result<QuantileProcess> {
    let path = rq_path(data)?;
    let values = path.intervals.iter().map(|iv| iv.coefficients[0]).collect();
    let meta = path
        .intervals
        .iter()
        .map(|iv| IntervalMeta { coefficients: iv.coefficients.clone(), basis: iv.sorted_basis() })
        .collect();
    Ok(QuantileProcess::new(path.breakpoints(), values, ProcessKind::RegressionQuantile)?.with_meta(meta))
}

/// Regression rank scores `â_i(α)` for all observations: continuous,
/// piecewise linear in α with nodes at 0, the path breakpoints, and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankScorePath {
    n: usize,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RankScorePath {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node α's: `0`, the breakpoints, `1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// `â(α)` at node `k`.
    pub fn node_values(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    /// Trajectory of observation `i` over the nodes.
    pub fn trajectory(&self, i: usize) -> Vec<f64> {
        (0..self.nodes.len()).map(|k| self.values[k * self.n + i]).collect()
    }

    /// `â(α)` by linear interpolation between nodes.
    pub fn at(&self, alpha: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange { what: "alpha", value: alpha });
        }
        let k = self.nodes.partition_point(|&t| t <= alpha).clamp(1, self.nodes.len() - 1);
        let (t0, t1) = (self.nodes[k - 1], self.nodes[k]);
        let w = (alpha - t0) / (t1 - t0);
        let (a0, a1) = (self.node_values(k - 1), self.node_values(k));
        Ok(a0.iter().zip(a1).map(|(x, y)| x + w * (y - x)).collect())
    }
}

/// Optimal solutions of the dual program over α ∈ [0,1].
pub fn rank_scores(data: &RegressionData) -> Result<RankScorePath> {
    let path = rq_path(data)?;
    Ok(rank_scores_from_path(&path))
}

pub(crate) fn rank_scores_from_path(path: &RqPath) -> RankScorePath {
    let n = path.n;
    let mut nodes = vec![0.0];
    let mut values = vec![1.0; n];
    for (k, iv) in path.intervals.iter().enumerate().skip(1) {
        let prev = &path.intervals[k - 1];
        nodes.push(iv.lo);
        values.extend(prev.rank_scores_at(iv.lo));
    }
    nodes.push(1.0);
    values.extend(core::iter::repeat_n(0.0, n));
    RankScorePath { n, nodes, values }
}

/// Per-interval derivatives `â'(α)` from the node values; interval `k`
/// spans `(nodes[k], nodes[k+1])`.
pub fn score_derivatives(path: &RankScorePath) -> Vec<Vec<f64>> {
    (0..path.nodes.len() - 1)
        .map(|k| {
            let h = path.nodes[k + 1] - path.nodes[k];
            path.node_values(k).iter().zip(path.node_values(k + 1)).map(|(a, b)| (b - a) / h).collect()
        })
        .collect()
}
