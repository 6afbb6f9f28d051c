//! Empirical regression quantile processes.
//!
//! This crate holds the numerical core: the regression α-quantile linear
//! program and its parametric path over α, the dual regression rank scores,
//! the averaged regression quantile and its two-step rank-based counterpart,
//! inversion of monotone quantile processes into step distribution functions,
//! and the expected α-shortfall of a step quantile function.
//!
//! The crate is `no_std` (it needs `alloc`). Floating point transcendental
//! functions come from [`libm`]. IO, CLI and the parallel Monte-Carlo driver
//! live in the `rqproc` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod linalg;

pub mod averaged;
pub mod model;
pub mod rank;
pub mod risk;
pub mod rq;
pub mod sampling;
pub mod special;

pub use averaged::{
    averaged_rq_process, constancy_spacing_check, invert_process, weight_decomposition, ConstancyReport,
    WeightDecomposition,
};
pub use error::{Error, Result};
pub use model::{IntervalMeta, ProcessKind, QuantileProcess, RQSolution, RegressionData, StepCDF};
pub use rank::{
    approx_scores, exact_scores, hajek_scores, jaeckel_dispersion, r_estimate_slopes, r_estimate_slopes_by_dispersion,
    two_step, two_step_process, two_step_with_slopes, ApproxVariant, DispersionFit, ScoreKind, ScoreVector, TwoStepRQ,
};
pub use risk::{expected_shortfall, ShortfallReport};
pub use rq::{rank_scores, rq_path, rq_process, score_derivatives, solve_rq, RankScorePath, RqPath};
pub use sampling::{generate_design, sample_errors, uniform_open, ErrorDist};
