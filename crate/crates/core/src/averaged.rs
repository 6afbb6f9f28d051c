//! The averaged regression quantile `B̄ₙ(α) = x̄*ᵀ β̂*(α)`, its weighted-mean
//! representation over the optimal basis, and inversion of monotone
//! quantile processes into step distribution functions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};
use crate::model::{IntervalMeta, ProcessKind, QuantileProcess, RegressionData, StepCDF};
use crate::rq::{self, PathInterval, RqPath};

/// Relative tolerance under which adjacent process values count as equal.
pub const VALUE_MERGE_TOL: f64 = 1e-10;

const SINGULAR_TOL: f64 = 1e-12;

/// Averaged regression quantile process, flagged monotone.
pub fn averaged_rq_process(data: &RegressionData) -> Result<QuantileProcess> {
    let path = rq::rq_path(data)?;
    averaged_from_path(data, &path)
}

pub(crate) fn averaged_from_path(data: &RegressionData, path: &RqPath) -> Result<QuantileProcess> {
    let xbar = data.mean_row();
    let tol = VALUE_MERGE_TOL * data.scale();
    let mut values: Vec<f64> = Vec::with_capacity(path.intervals().len());
    for (k, iv) in path.intervals().iter().enumerate() {
        let mut v = linalg::dot(&xbar, iv.coefficients());
        if let Some(&prev) = values.last() {
            if v < prev {
                // Degenerate bases can reproduce the previous value up to rounding.
                if prev - v > tol {
                    return Err(Error::NotMonotone { index: k });
                }
                v = prev;
            }
        }
        values.push(v);
    }
    let meta = path
        .intervals()
        .iter()
        .map(|iv| IntervalMeta { coefficients: iv.coefficients().to_vec(), basis: iv.sorted_basis() })
        .collect();
    QuantileProcess::new(path.breakpoints(), values, ProcessKind::Averaged)?.with_meta(meta).into_monotone()
}

/// `B̄ₙ(α)` on one interval as a weighted mean of the basic responses.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDecomposition {
    /// Sorted basis observations.
    pub basis: Vec<usize>,
    pub weights: Vec<f64>,
    pub responses: Vec<f64>,
}

impl WeightDecomposition {
    /// Weights `w = X_{n1}^{-T} x̄*` for the basis of `interval`.
    pub fn from_interval(data: &RegressionData, interval: &PathInterval) -> Result<Self> {
        let m = data.dim();
        let mut basis = interval.sorted_basis();
        basis.dedup();
        let mut a = Vec::with_capacity(m * m);
        let mut hadamard = 1.0;
        for &i in &basis {
            let row = data.row(i);
            hadamard *= libm::sqrt(linalg::dot(row, row));
            a.extend_from_slice(row);
        }
        let lu = Lu::factor(&a, m).ok_or(Error::SingularBasis { det: 0.0 })?;
        let det = lu.det();
        if libm::fabs(det) < SINGULAR_TOL * hadamard {
            return Err(Error::SingularBasis { det });
        }
        let mut weights = data.mean_row();
        lu.solve_transpose(&mut weights);
        let responses = basis.iter().map(|&i| data.response()[i]).collect();
        Ok(WeightDecomposition { basis, weights, responses })
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_k Y_{i_k}`.
    pub fn value(&self) -> f64 {
        linalg::dot(&self.weights, &self.responses)
    }
}

/// Weight decomposition on interval `interval_index` of the regression
/// quantile process.
pub fn weight_decomposition(data: &RegressionData, interval_index: usize) -> Result<WeightDecomposition> {
    let path = rq::rq_path(data)?;
    let count = path.intervals().len();
    let iv = path.intervals().get(interval_index).ok_or(Error::NoSuchInterval { index: interval_index, count })?;
    WeightDecomposition::from_interval(data, iv)
}

fn value_scale(values: &[f64]) -> f64 {
    values.iter().fold(1.0_f64, |a, v| a.max(libm::fabs(*v)))
}

/// Inverts a nondecreasing process into the distribution function of its
/// values, each weighted by the length of the α-interval it occupies.
/// Adjacent values equal within `VALUE_MERGE_TOL · scale` share one atom.
///
/// With `require_monotone`, the process must carry the monotone flag.
/// Decreasing values are rejected either way.
pub fn invert_process(proc: &QuantileProcess, require_monotone: bool) -> Result<StepCDF> {
    let values = proc.values();
    if require_monotone && !proc.is_monotone() {
        let index = values.windows(2).position(|w| w[1] < w[0]).map_or(0, |k| k + 1);
        return Err(Error::NotMonotone { index });
    }
    if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::NotMonotone { index: k + 1 });
    }
    let tol = VALUE_MERGE_TOL * value_scale(values);
    let bps = proc.breakpoints();
    let mut atoms = Vec::new();
    let mut cum = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match atoms.last() {
            Some(&z) if v - z <= tol => {}
            _ => {
                if k > 0 {
                    cum.push(bps[k - 1]);
                }
                atoms.push(v);
            }
        }
    }
    cum.push(1.0);
    Ok(StepCDF::from_parts(atoms, cum))
}

/// Widest maximal α-interval on which the process is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstancyReport {
    pub max_width: f64,
    /// `(p+1)/n`.
    pub bound: f64,
    pub within_bound: bool,
    /// The process is constant on all of (0,1): an exact fit, outside the
    /// generic setting of the bound.
    pub exact_fit: bool,
}

pub fn constancy_spacing_check(proc: &QuantileProcess, n: usize, p: usize) -> ConstancyReport {
    let values = proc.values();
    let tol = VALUE_MERGE_TOL * value_scale(values);
    let mut max_width: f64 = 0.0;
    let mut run_start = 0.0;
    for k in 0..values.len() {
        let (_, hi) = proc.interval(k);
        let run_ends = k + 1 == values.len() || libm::fabs(values[k + 1] - values[k]) > tol;
        if run_ends {
            max_width = max_width.max(hi - run_start);
            run_start = hi;
        }
    }
    let bound = (p + 1) as f64 / n as f64;
    ConstancyReport {
        max_width,
        bound,
        within_bound: max_width <= bound + rq::MERGE_TOL,
        exact_fit: max_width >= 1.0 - rq::MERGE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line3() -> RegressionData {
        RegressionData::intercept_only(vec![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn intercept_only_average_is_sample_quantile() {
        let q = averaged_rq_process(&line3()).unwrap();
        assert!(q.is_monotone());
        assert_eq!(q.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn intercept_only_weight_is_one() {
        for k in 0..3 {
            let w = weight_decomposition(&line3(), k).unwrap();
            assert_eq!(w.weights, vec![1.0]);
            assert_eq!(w.basis, vec![k]);
            assert_eq!(w.value(), (k + 1) as f64);
        }
        assert!(matches!(weight_decomposition(&line3(), 3), Err(Error::NoSuchInterval { .. })));
    }

    #[test]
    fn inversion_of_sample_quantile_is_ecdf() {
        let f = invert_process(&averaged_rq_process(&line3()).unwrap(), true).unwrap();
        assert_eq!(f.atoms(), &[1.0, 2.0, 3.0]);
        let p = f.probabilities();
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(f.cdf(2.0), f.cum_probs()[1]);
    }

    #[test]
    fn constant_process_inverts_to_point_mass() {
        let q = QuantileProcess::constant(2.5, ProcessKind::Custom);
        let f = invert_process(&q, true).unwrap();
        assert_eq!(f.atoms(), &[2.5]);
        assert_eq!(f.cum_probs(), &[1.0]);
    }

    #[test]
    fn equal_values_merge() {
        let q = QuantileProcess::new(vec![0.2, 0.5, 0.7], vec![1.0, 1.0, 2.0, 2.0], ProcessKind::Custom)
            .unwrap()
            .into_monotone()
            .unwrap();
        let f = invert_process(&q, true).unwrap();
        assert_eq!(f.atoms(), &[1.0, 2.0]);
        assert_eq!(f.cum_probs(), &[0.5, 1.0]);
    }

    #[test]
    fn decreasing_process_is_rejected() {
        let q = QuantileProcess::new(vec![0.5], vec![2.0, 1.0], ProcessKind::Custom).unwrap();
        assert!(matches!(invert_process(&q, false), Err(Error::NotMonotone { index: 1 })));
        let q = QuantileProcess::new(vec![0.5], vec![1.0, 2.0], ProcessKind::Custom).unwrap();
        assert!(matches!(invert_process(&q, true), Err(Error::NotMonotone { .. })));
        assert!(invert_process(&q, false).is_ok());
    }

    #[test]
    fn spacing_bound_equality_for_sample_quantiles() {
        let r = constancy_spacing_check(&averaged_rq_process(&line3()).unwrap(), 3, 0);
        assert!((r.max_width - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.within_bound && !r.exact_fit);
    }

    #[test]
    fn spacing_flags_exact_fit() {
        let d = RegressionData::from_rows(&[[0.0], [1.0]], vec![0.0, 1.0]).unwrap();
        let r = constancy_spacing_check(&averaged_rq_process(&d).unwrap(), 2, 1);
        assert_eq!(r.max_width, 1.0);
        assert!(r.exact_fit);
        assert!(r.within_bound); // (p+1)/n = 1 here
    }
}
