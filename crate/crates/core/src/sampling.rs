//! Inverse-transform sampling of model errors and simulated designs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_core::RngCore;

use crate::special::{normal_cdf, normal_quantile};

/// Error distributions of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorDist {
    Normal,
    Cauchy,
    /// Generalized extreme value with CDF `exp(−(1+ξz)^{−1/ξ})`; `shape` is ξ.
    Gev {
        shape: f64,
    },
}

impl ErrorDist {
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            ErrorDist::Normal => normal_quantile(u),
            ErrorDist::Cauchy => libm::tan(PI * (u - 0.5)),
            ErrorDist::Gev { shape } => {
                let t = -libm::log(u);
                if shape == 0.0 {
                    -libm::log(t)
                } else {
                    (libm::pow(t, -shape) - 1.0) / shape
                }
            }
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            ErrorDist::Normal => normal_cdf(z),
            ErrorDist::Cauchy => 0.5 + libm::atan(z) / PI,
            ErrorDist::Gev { shape } => {
                if shape == 0.0 {
                    return libm::exp(-libm::exp(-z));
                }
                let s = 1.0 + shape * z;
                if s <= 0.0 {
                    // outside the support: above the upper end for ξ < 0, below the lower end for ξ > 0
                    return if shape < 0.0 { 1.0 } else { 0.0 };
                }
                libm::exp(-libm::pow(s, -1.0 / shape))
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ErrorDist::Normal => "normal",
            ErrorDist::Cauchy => "cauchy",
            ErrorDist::Gev { .. } => "gev",
        }
    }
}

/// Uniform draw on the open interval (0,1) from the top 53 bits.
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_errors<R: RngCore + ?Sized>(dist: ErrorDist, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.quantile(uniform_open(rng))).collect()
}

/// Covariate rows: column `j` drawn i.i.d. uniform on `ranges[j]` (column
/// by column), then recentred to zero sum.
pub fn generate_design<R: RngCore + ?Sized>(ranges: &[(f64, f64)], n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows = alloc::vec![Vec::with_capacity(ranges.len()); n];
    for &(lo, hi) in ranges {
        let col: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * uniform_open(rng)).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        for (row, v) in rows.iter_mut().zip(col) {
            row.push(v - mean);
        }
    }
    rows
}
