use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::trapezoid;
use crate::metrics::{gaussian_kde, local_maxima};

pub const KDE_GRID_POINTS: usize = 201;
const MIN_BANDWIDTH: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl KdeCurve {
    /// Grid positions of local maxima.
    pub fn modes(&self) -> Vec<f64> {
        local_maxima(&self.density).into_iter().map(|k| self.grid[k]).collect()
    }

    /// Grid positions of interior local minima lying between two modes.
    pub fn valleys(&self) -> Vec<f64> {
        let neg: Vec<f64> = self.density.iter().map(|d| -d).collect();
        let modes = local_maxima(&self.density);
        let (Some(&first), Some(&last)) = (modes.first(), modes.last()) else {
            return Vec::new();
        };
        local_maxima(&neg)
            .into_iter()
            .filter(|&k| k > first && k < last)
            .map(|k| self.grid[k])
            .collect()
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }
}

/// Scott's rule, `sd * n^(-1/5)` with the sample standard deviation, floored
/// at 0.02 so identical values still give a finite peak.
pub fn scott_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var.sqrt() * n.powf(-0.2)).max(MIN_BANDWIDTH)
}

/// Gaussian KDE on 201 points spanning `[min(0, lo - 4h), max(1.2, hi + 4h)]`.
pub fn kde_pdf(values: &[f64]) -> Result<KdeCurve> {
    if values.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 values, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite value".into()));
    }
    let h = scott_bandwidth(values);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = (lo - 4.0 * h).min(0.0);
    let end = (hi + 4.0 * h).max(1.2);
    let grid: Vec<f64> = (0..KDE_GRID_POINTS)
        .map(|k| start + (end - start) * k as f64 / (KDE_GRID_POINTS - 1) as f64)
        .collect();
    let density = gaussian_kde(values, h, &grid);
    Ok(KdeCurve {
        bandwidth: h,
        grid,
        density,
    })
}
