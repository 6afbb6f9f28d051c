//! Expected α-shortfall of a step quantile function.

use crate::error::{Error, Result};
use crate::model::{ProcessKind, QuantileProcess};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortfallReport {
    pub alpha: f64,
    /// `−(1/α) ∫₀^α Q(u) du`.
    pub shortfall: f64,
    /// `(1/α) ∫₀^α Q(u) du`, the mean of the lower α-tail.
    pub tail_mean: f64,
    /// `Q(α)` (right-continuous), or the last value at α = 1.
    pub quantile_at_alpha: f64,
    pub method: ProcessKind,
}

/// Integrates the monotone step process exactly over `(0, α)`.
pub fn expected_shortfall(proc: &QuantileProcess, alpha: f64) -> Result<ShortfallReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange { what: "alpha", value: alpha });
    }
    if !proc.is_monotone() {
        let index = proc.values().windows(2).position(|w| w[1] < w[0]).map_or(0, |k| k + 1);
        return Err(Error::NotMonotone { index });
    }
    let mut integral = 0.0;
    for (k, &v) in proc.values().iter().enumerate() {
        let (lo, hi) = proc.interval(k);
        if lo >= alpha {
            break;
        }
        integral += v * (hi.min(alpha) - lo);
    }
    let tail_mean = integral / alpha;
    let quantile_at_alpha = if alpha < 1.0 { proc.evaluate(alpha)? } else { proc.last_value() };
    Ok(ShortfallReport { alpha, shortfall: -tail_mean, tail_mean, quantile_at_alpha, method: proc.kind() })
}
