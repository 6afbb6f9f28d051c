//! Rank scores for `φ_λ(u) = λ − 1[u < λ]`, Jaeckel's rank dispersion, the
//! R-estimator of the slopes and the averaged two-step regression quantile.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{order_statistic_process, ProcessKind, QuantileProcess, RegressionData};
use crate::rq;
use crate::special::inc_beta;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// `E φ(U_{n:i})`.
    Exact,
    /// `n ∫_{(i−1)/n}^{i/n} φ`.
    ApproxIntegral,
    /// `φ(i/(n+1))`.
    ApproxPlugin,
    /// Hájek's ramp in the rank, shifted by `−(1−λ)` onto the `φ_λ` scale.
    Hajek,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxVariant {
    /// Cell average of `φ_λ`.
    Integral,
    /// `φ_λ` at `i/(n+1)`.
    PlugIn,
}

/// Scores `A_n(1), …, A_n(n)` indexed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub n: usize,
    pub lambda: f64,
    pub kind: ScoreKind,
    pub values: Vec<f64>,
}

impl ScoreVector {
    /// Score of rank `r` (1-based).
    pub fn at_rank(&self, r: usize) -> f64 {
        self.values[r - 1]
    }

    /// Hájek scores of the ranks `1..=n`, centered as `a_i − (1−λ)`.
    pub fn hajek(n: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let ranks: Vec<usize> = (1..=n).collect();
        let values = hajek_scores(&ranks, lambda)?.into_iter().map(|a| a - (1.0 - lambda)).collect();
        Ok(ScoreVector { n, lambda, kind: ScoreKind::Hajek, values })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "lambda", value: lambda })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::DimensionMismatch { what: "score length", expected: 1, found: 0 })
    } else {
        Ok(())
    }
}

/// Exact scores `A_n(i) = λ − P(U_{n:i} < λ) = λ − I_λ(i, n−i+1)`.
pub fn exact_scores(n: usize, lambda: f64) -> Result<ScoreVector> {
    check_n(n)?;
    check_lambda(lambda)?;
    let values = (1..=n).map(|i| lambda - inc_beta(lambda, i as f64, (n - i + 1) as f64)).collect();
    Ok(ScoreVector { n, lambda, kind: ScoreKind::Exact, values })
}

/// Approximate scores, cell-average (i) or plug-in (ii).
pub fn approx_scores(n: usize, lambda: f64, variant: ApproxVariant) -> Result<ScoreVector> {
    check_n(n)?;
    check_lambda(lambda)?;
    let nl = lambda * n as f64;
    let values = (1..=n)
        .map(|i| match variant {
            ApproxVariant::Integral => {
                if i as f64 <= nl {
                    lambda - 1.0
                } else if (i - 1) as f64 >= nl {
                    lambda
                } else {
                    (i - 1) as f64 - lambda * (n - 1) as f64
                }
            }
            ApproxVariant::PlugIn => {
                if (i as f64) / ((n + 1) as f64) < lambda {
                    lambda - 1.0
                } else {
                    lambda
                }
            }
        })
        .collect();
    let kind = match variant {
        ApproxVariant::Integral => ScoreKind::ApproxIntegral,
        ApproxVariant::PlugIn => ScoreKind::ApproxPlugin,
    };
    Ok(ScoreVector { n, lambda, kind, values })
}

/// Hájek's rank scores: 0 below rank `nλ`, 1 from rank `nλ+1`, linear between.
pub fn hajek_scores(ranks: &[usize], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let n = ranks.len();
    let mut seen = vec![false; n];
    for &r in ranks {
        if r == 0 || r > n || seen[r - 1] {
            return Err(Error::InvalidRanks { n });
        }
        seen[r - 1] = true;
    }
    let nl = n as f64 * lambda;
    Ok(ranks
        .iter()
        .map(|&r| {
            let r = r as f64;
            if r < nl {
                0.0
            } else if r < nl + 1.0 {
                r - nl
            } else {
                1.0
            }
        })
        .collect())
}

/// 1-based ranks; ties broken by original index.
pub fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut r = vec![0; values.len()];
    for (k, &i) in order.iter().enumerate() {
        r[i] = k + 1;
    }
    r
}

fn slope_residuals(data: &RegressionData, slopes: &[f64]) -> Vec<f64> {
    (0..data.n()).map(|i| data.response()[i] - linalg::dot(&data.row(i)[1..], slopes)).collect()
}

/// Jaeckel's dispersion `Σ (Y_i − x_iᵀb) A_n(R_i)` of the slope vector `b`.
pub fn jaeckel_dispersion(data: &RegressionData, slopes: &[f64], scores: &ScoreVector) -> Result<f64> {
    if slopes.len() != data.p() {
        return Err(Error::DimensionMismatch { what: "slope vector", expected: data.p(), found: slopes.len() });
    }
    if scores.values.len() != data.n() {
        return Err(Error::DimensionMismatch { what: "score vector", expected: data.n(), found: scores.values.len() });
    }
    Ok(dispersion(data, slopes, scores))
}

fn dispersion(data: &RegressionData, slopes: &[f64], scores: &ScoreVector) -> f64 {
    let mut e = slope_residuals(data, slopes);
    e.sort_by(f64::total_cmp);
    e.iter().zip(&scores.values).map(|(r, a)| r * a).sum()
}

/// R-estimator of the slopes for `φ_λ` with cell-average scores.
///
/// For these scores the minimizer of the dispersion coincides with the slope
/// part of the regression λ-quantile, which is what is returned.
pub fn r_estimate_slopes(data: &RegressionData, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if data.p() == 0 {
        return Ok(Vec::new());
    }
    Ok(rq::solve_rq(data, lambda)?.slopes().to_vec())
}

/// Result of direct dispersion minimization. The minimizing set is in
/// general not a single point; `slopes` is the point the search stopped at.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionFit {
    pub slopes: Vec<f64>,
    pub dispersion: f64,
    pub cycles: usize,
}

const MAX_CYCLES: usize = 10_000;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizes the dispersion for arbitrary scores by derivative-free search:
/// cycles of golden-section line searches along the coordinate axes and the
/// last cycle's displacement, restarted along the residual-tie hyperplanes
/// (the kinks of the piecewise-linear objective) when a cycle stalls.
pub fn r_estimate_slopes_by_dispersion(
    data: &RegressionData,
    scores: &ScoreVector,
    start: Option<&[f64]>,
) -> Result<DispersionFit> {
    let p = data.p();
    let start = start.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let disp0 = jaeckel_dispersion(data, &start, scores)?;
    if p == 0 {
        return Ok(DispersionFit { slopes: start, dispersion: disp0, cycles: 0 });
    }
    let f = |b: &[f64]| dispersion(data, b, scores);
    let tol = 1e-10 * data.scale();
    let y = data.response();
    let y_range = y.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v)) - y.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let steps: Vec<f64> = (1..=p)
        .map(|j| {
            let col = (0..data.n()).map(|i| data.row(i)[j]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            (y_range + 1.0) / (hi - lo).max(1e-12)
        })
        .collect();

    let mut b = start;
    let mut fb = disp0;
    for cycle in 1..=MAX_CYCLES {
        let b_old = b.clone();
        let f_old = fb;
        for j in 0..p {
            let mut dir = vec![0.0; p];
            dir[j] = 1.0;
            line_search(&f, &mut b, &mut fb, &dir, steps[j]);
        }
        let disp: Vec<f64> = b.iter().zip(&b_old).map(|(x, y)| x - y).collect();
        let norm = libm::sqrt(linalg::dot(&disp, &disp));
        if norm > 0.0 {
            line_search(&f, &mut b, &mut fb, &disp, 1.0);
        }
        if f_old - fb < tol {
            let before = fb;
            for dir in ridge_directions(data, &b) {
                let h = linalg::dot(&dir, &steps.iter().map(|s| s.abs()).collect::<Vec<_>>()).abs().max(1e-6);
                line_search(&f, &mut b, &mut fb, &dir, h);
            }
            if before - fb < tol {
                return Ok(DispersionFit { slopes: b, dispersion: fb, cycles: cycle });
            }
        }
    }
    Err(Error::NonConvergence { iterations: MAX_CYCLES })
}

/// Coordinate axes projected onto the hyperplanes where the closest pairs of
/// residuals tie.
fn ridge_directions(data: &RegressionData, b: &[f64]) -> Vec<Vec<f64>> {
    let p = data.p();
    let e = slope_residuals(data, b);
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&i, &j| e[i].total_cmp(&e[j]));
    let mut gaps: Vec<(f64, usize, usize)> = order.windows(2).map(|w| (e[w[1]] - e[w[0]], w[0], w[1])).collect();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dirs = Vec::new();
    for &(_, i, j) in gaps.iter().take(2 * p + 2) {
        let diff: Vec<f64> = data.row(i)[1..].iter().zip(&data.row(j)[1..]).map(|(a, b)| a - b).collect();
        let nn = linalg::dot(&diff, &diff);
        if nn == 0.0 {
            continue;
        }
        for c in 0..p {
            let mut dir = vec![0.0; p];
            dir[c] = 1.0;
            let s = diff[c] / nn;
            dir.iter_mut().zip(&diff).for_each(|(d, x)| *d -= s * x);
            if linalg::dot(&dir, &dir) > 1e-20 {
                dirs.push(dir);
            }
        }
    }
    dirs
}

/// Golden-section search of `t ↦ f(b + t·dir)` on a bracket grown from `h`.
/// Updates `b` only on strict improvement.
fn line_search<F: Fn(&[f64]) -> f64>(f: &F, b: &mut Vec<f64>, fb: &mut f64, dir: &[f64], h: f64) {
    let at = |t: f64| -> (Vec<f64>, f64) {
        let x: Vec<f64> = b.iter().zip(dir).map(|(v, d)| v + t * d).collect();
        let fx = f(&x);
        (x, fx)
    };
    let f0 = *fb;
    let (_, fp) = at(h);
    let (_, fm) = at(-h);
    let (mut lo, mut hi): (f64, f64);
    if fp >= f0 && fm >= f0 {
        lo = -h;
        hi = h;
    } else {
        let s = if fp < fm { 1.0 } else { -1.0 };
        let mut prev: f64 = 0.0;
        let mut cur = s * h;
        let mut fcur = fp.min(fm);
        let mut steps = 0;
        loop {
            let next = 2.0 * cur;
            let (_, fnext) = at(next);
            steps += 1;
            if fnext >= fcur || steps > 200 {
                lo = prev.min(next);
                hi = prev.max(next);
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
    }
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = at(x1).1;
    let mut f2 = at(x2).1;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = at(x1).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = at(x2).1;
        }
    }
    let t = if f1 <= f2 { x1 } else { x2 };
    let (x, fx) = at(t);
    if fx < f0 {
        *b = x;
        *fb = fx;
    }
}

/// Two-step regression quantile: R-estimated slopes plus order statistics
/// of the residuals `Y_i − (x_i − x̄)ᵀβ̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepRQ {
    pub lambda: f64,
    pub slopes: Vec<f64>,
    /// `Y_i − (x_i − x̄)ᵀβ̃`, in observation order.
    pub residuals: Vec<f64>,
    /// Observation indices sorting the residuals (stable in the index).
    pub order: Vec<usize>,
    /// Residuals in increasing order.
    pub sorted: Vec<f64>,
    scale: f64,
    xbar_slopes: f64,
}

/// Two-step fit with `φ_λ` R-estimated slopes.
pub fn two_step(data: &RegressionData, lambda: f64) -> Result<TwoStepRQ> {
    let slopes = r_estimate_slopes(data, lambda)?;
    Ok(two_step_with_slopes(data, lambda, slopes))
}

/// Two-step fit with given slopes.
pub fn two_step_with_slopes(data: &RegressionData, lambda: f64, slopes: Vec<f64>) -> TwoStepRQ {
    let xbar = data.mean_row();
    let xbar_slopes = linalg::dot(&xbar[1..], &slopes);
    let residuals: Vec<f64> = slope_residuals(data, &slopes).into_iter().map(|r| r + xbar_slopes).collect();
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| residuals[a].total_cmp(&residuals[b]).then(a.cmp(&b)));
    let sorted = order.iter().map(|&i| residuals[i]).collect();
    TwoStepRQ { lambda, slopes, residuals, order, sorted, scale: data.scale(), xbar_slopes }
}

impl TwoStepRQ {
    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// Order-statistic index `⌈nα⌉` clamped to `[1, n]`.
    pub fn order_index(&self, alpha: f64) -> usize {
        let n = self.n();
        let t = alpha * n as f64;
        let k = libm::ceil(t - 1e-9 * (1.0 + t)) as isize;
        k.clamp(1, n as isize) as usize
    }

    /// `B̃ₙ(α) = r_{n:⌈nα⌉}` for α ∈ (0,1].
    pub fn averaged(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange { what: "alpha", value: alpha });
        }
        Ok(self.sorted[self.order_index(alpha) - 1])
    }

    /// Intercept `β̃₀(α)`: the same order statistic of `Y_i − x_iᵀβ̃`.
    pub fn intercept(&self, alpha: f64) -> Result<f64> {
        Ok(self.averaged(alpha)? - self.xbar_slopes)
    }

    /// `B̃ₙ(·)` as a step process with breakpoints at `k/n`; tied residuals
    /// share an interval.
    pub fn process(&self) -> QuantileProcess {
        order_statistic_process(&self.sorted, 1e-12 * self.scale, ProcessKind::TwoStep { lambda: self.lambda })
            .expect("residuals are finite and nonempty")
    }

    /// One interval `((k−1)/n, k/n)` per order statistic, ties not merged.
    pub fn order_statistic_process(&self) -> QuantileProcess {
        let n = self.n();
        let breakpoints = (1..n).map(|k| k as f64 / n as f64).collect();
        QuantileProcess::new(breakpoints, self.sorted.clone(), ProcessKind::TwoStep { lambda: self.lambda })
            .and_then(QuantileProcess::into_monotone)
            .expect("sorted finite residuals")
    }

    /// Number of distinct steps of `B̃ₙ`, each ending at some `k/n`. Equals
    /// `n` for distinct residuals. With slopes from the regression
    /// λ-quantile the `p+1` basis observations share one residual, which
    /// leaves `n − p` steps.
    pub fn step_count(&self) -> usize {
        self.process().interval_count()
    }
}

/// `B̃ₙ(·; λ)` as a monotone process.
pub fn two_step_process(data: &RegressionData, lambda: f64) -> Result<QuantileProcess> {
    Ok(two_step(data, lambda)?.process())
}

/// `B̃ₙ(α)` with the slopes re-estimated at `λ = α`. Not monotone in α in
/// general; a diagnostic, not an estimator to invert.
pub fn two_step_alpha_matched(data: &RegressionData, alpha: f64) -> Result<f64> {
    two_step(data, alpha)?.averaged(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_scores_small_cases() {
        let s = exact_scores(1, 0.37).unwrap();
        assert!(s.values[0].abs() < 1e-15);
        let s = exact_scores(2, 0.5).unwrap();
        assert!((s.values[0] + 0.25).abs() < 1e-14);
        assert!((s.values[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn approx_integral_examples() {
        let s = approx_scores(10, 0.5, ApproxVariant::Integral).unwrap();
        for i in 0..10 {
            assert_eq!(s.values[i], if i < 5 { -0.5 } else { 0.5 });
        }
        let s = approx_scores(3, 0.5, ApproxVariant::Integral).unwrap();
        assert_eq!(s.values, vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn approx_plugin_example() {
        let s = approx_scores(4, 0.5, ApproxVariant::PlugIn).unwrap();
        assert_eq!(s.values, vec![-0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn hajek_examples() {
        assert_eq!(hajek_scores(&[1, 2, 3, 4], 0.5).unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(hajek_scores(&[1, 2, 3, 4, 5], 0.5).unwrap(), vec![0.0, 0.0, 0.5, 1.0, 1.0]);
        let tiny = hajek_scores(&[3, 1, 2], 1e-12).unwrap();
        assert!(tiny.iter().all(|a| (a - 1.0).abs() < 1e-11));
        assert!(matches!(hajek_scores(&[1, 1, 2], 0.5), Err(Error::InvalidRanks { n: 3 })));
        assert!(matches!(hajek_scores(&[0, 1], 0.5), Err(Error::InvalidRanks { .. })));
        assert!(matches!(hajek_scores(&[1, 2], 1.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn hajek_shift_equals_cell_average() {
        for n in [1, 4, 7, 25] {
            for lambda in [0.1, 0.5, 0.64, 0.9] {
                let h = ScoreVector::hajek(n, lambda).unwrap();
                let a = approx_scores(n, lambda, ApproxVariant::Integral).unwrap();
                for (x, y) in h.values.iter().zip(&a.values) {
                    assert!((x - y).abs() < 1e-12, "n={n} λ={lambda}");
                }
            }
        }
    }

    #[test]
    fn ranks_are_stable() {
        assert_eq!(ranks(&[0.5, -1.0, 0.5, 2.0]), vec![2, 1, 3, 4]);
    }

    #[test]
    fn dispersion_zero_at_exact_fit() {
        let d = RegressionData::from_rows(&[[0.0], [1.0], [2.0]], vec![0.0, 1.0, 2.0]).unwrap();
        let s = approx_scores(3, 0.5, ApproxVariant::Integral).unwrap();
        assert_eq!(jaeckel_dispersion(&d, &[1.0], &s).unwrap(), 0.0);
        assert!(jaeckel_dispersion(&d, &[1.0, 2.0], &s).is_err());
    }

    #[test]
    fn exact_fit_two_step_is_constant() {
        let d = RegressionData::from_rows(&[[0.0], [1.0], [2.0]], vec![0.0, 1.0, 2.0]).unwrap();
        for lambda in [0.2, 0.5, 0.8] {
            let t = two_step(&d, lambda).unwrap();
            assert!((t.slopes[0] - 1.0).abs() < 1e-15);
            let q = t.process();
            assert_eq!(q.interval_count(), 1);
            assert!((q.values()[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn intercept_only_two_step_is_sample_quantile() {
        let y = vec![3.0, -1.0, 2.5, 0.0, 7.0];
        let d = RegressionData::intercept_only(y.clone()).unwrap();
        let t = two_step(&d, 0.5).unwrap();
        let mut s = y.clone();
        s.sort_by(f64::total_cmp);
        for k in 1..=5 {
            let a = k as f64 / 5.0;
            assert_eq!(t.averaged(a).unwrap(), s[k - 1]);
            assert_eq!(t.averaged(a - 0.1).unwrap(), s[k - 1]);
        }
        assert_eq!(t.step_count(), 5);
    }
}
