//! Deterministic streaming statistics. Accumulators are combined in block
//! order so parallel Monte Carlo reduces to the same floating-point result
//! regardless of worker count.

use serde::{Deserialize, Serialize};

/// Running first and second moments of a scalar stream.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct MeanAccumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// Merge; callers must merge in a fixed order for reproducibility.
    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Least-squares slope through the origin of `(x_i, y_i)` pairs.
pub fn slope_through_origin(points: &[(f64, f64)]) -> f64 {
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Ordinary least-squares slope of `y` against `x` (with intercept).
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
