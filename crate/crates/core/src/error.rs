use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("design with intercept has rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("{what} = {value} is outside its admissible range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("pivoting did not terminate after {iterations} iterations (degenerate design? try jittering)")]
    PivotCycle { iterations: usize },
    #[error("basis submatrix is numerically singular (|det| = {det:e})")]
    SingularBasis { det: f64 },
    #[error("process values decrease at interval {index}")]
    NotMonotone { index: usize },
    #[error("ranks are not a permutation of 1..={n}")]
    InvalidRanks { n: usize },
    #[error("dispersion minimization did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("interval index {index} out of range (process has {count} intervals)")]
    NoSuchInterval { index: usize, count: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
}
