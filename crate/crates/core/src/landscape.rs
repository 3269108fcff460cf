//! Social-force field and potential landscape reconstruction.
//!
//! Force samples (NOD or FOD) are smoothed with a Gaussian Nadaraya–Watson
//! estimator on a uniform grid over `[-1, 1]`, integrated with the
//! trapezoidal rule, negated and shifted to zero mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::RunRecord;

pub const GRID_POINTS: usize = 401;
pub const BANDWIDTH: f64 = 0.1;
pub const NO_DATA_WEIGHT: f64 = 1e-12;
pub const SPARSE_BIN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub x: f64,
    pub force: f64,
    pub t_n: f64,
}

/// Which force proxy to read from a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceKind {
    Nod,
    Fod,
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64)
        .collect()
}

/// Realized opinion shift per unit influence between consecutive snapshots.
pub fn nod_samples(run: &RunRecord, alpha: f64) -> Result<Vec<ForceSample>> {
    if !(alpha > 0.0) {
        return Err(Error::config("alpha", "normalized opinion difference needs alpha > 0"));
    }
    Ok(run
        .sample_rows(alpha)
        .into_iter()
        .filter_map(|r| {
            r.nod.map(|force| ForceSample {
                x: r.x,
                force,
                t_n: r.t_n,
            })
        })
        .collect())
}

/// Mean deviation of concordant followee posts, for agents that had any.
pub fn fod_samples(run: &RunRecord) -> Vec<ForceSample> {
    run.sample_rows(run.config.alpha)
        .into_iter()
        .filter_map(|r| {
            r.fod.map(|force| ForceSample {
                x: r.x,
                force,
                t_n: r.t_n,
            })
        })
        .collect()
}

/// Mean deviation of `concordant` from `x`, or `None` when empty.
pub fn followee_force(x: f64, concordant: &[f64]) -> Option<f64> {
    if concordant.is_empty() {
        None
    } else {
        Some(concordant.iter().map(|t| t - x).sum::<f64>() / concordant.len() as f64)
    }
}

/// Gaussian Nadaraya–Watson estimate of the force on `grid`. `None` marks
/// grid points whose total kernel weight is below 1e-12.
pub fn kernel_regression(samples: &[(f64, f64)], grid: &[f64], h: f64) -> Result<Vec<Option<f64>>> {
    if !(h > 0.0) {
        return Err(Error::config("bandwidth", format!("must be positive, got {h}")));
    }
    let inv = 1.0 / h;
    let eval = |g: f64| {
        let (mut w_sum, mut wf_sum) = (0.0, 0.0);
        for &(x, f) in samples {
            let z = (g - x) * inv;
            let w = (-0.5 * z * z).exp();
            w_sum += w;
            wf_sum += w * f;
        }
        (w_sum >= NO_DATA_WEIGHT).then(|| wf_sum / w_sum)
    };
    #[cfg(feature = "parallel")]
    let out: Vec<Option<f64>> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&g| eval(g)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Option<f64>> = grid.iter().map(|&g| eval(g)).collect();
    if out.iter().all(Option::is_none) {
        return Err(Error::NoData);
    }
    Ok(out)
}

/// `V(x) = C - integral of F from the grid start to x`, with `C` chosen so
/// the trapezoidal integral of `V` over the grid is zero.
pub fn potential(grid: &[f64], force: &[f64]) -> Result<Vec<f64>> {
    if grid.len() != force.len() || grid.len() < 2 {
        return Err(Error::Invalid("potential needs matching grid and force of length >= 2".into()));
    }
    let mut v = Vec::with_capacity(grid.len());
    v.push(0.0);
    for k in 1..grid.len() {
        let dx = grid[k] - grid[k - 1];
        let prev = v[k - 1];
        v.push(prev - 0.5 * (force[k - 1] + force[k]) * dx);
    }
    let span = grid[grid.len() - 1] - grid[0];
    let c = trapezoid(grid, &v) / span;
    v.iter_mut().for_each(|y| *y -= c);
    Ok(v)
}

pub fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
    grid.windows(2)
        .zip(y.windows(2))
        .map(|(g, y)| 0.5 * (y[0] + y[1]) * (g[1] - g[0]))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialCurve {
    pub t_lo: f64,
    /// `f64::INFINITY` for the open last bin.
    pub t_hi: f64,
    pub n_samples: usize,
    pub sparse: bool,
    /// Covered grid points (leading and trailing no-data points trimmed).
    pub grid: Vec<f64>,
    pub force: Vec<f64>,
    pub potential: Vec<f64>,
}

impl PotentialCurve {
    /// Grid indices of strict interior local minima of `V`.
    pub fn minima(&self) -> Vec<usize> {
        let v = &self.potential;
        (1..v.len().saturating_sub(1))
            .filter(|&k| v[k] < v[k - 1] && v[k] < v[k + 1])
            .collect()
    }

    /// Largest drop from the edge maxima to the deepest interior minimum;
    /// zero for a flat or single-well profile.
    pub fn well_depth(&self) -> f64 {
        let v = &self.potential;
        let Some(deepest) = self.minima().into_iter().map(|k| v[k]).reduce(f64::min) else {
            return 0.0;
        };
        let rim = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rim - deepest
    }
}

/// Smooth and integrate one group of samples.
pub fn curve(samples: &[ForceSample], grid: &[f64], h: f64, t_lo: f64, t_hi: f64) -> Result<PotentialCurve> {
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.force)).collect();
    let smooth = kernel_regression(&pairs, grid, h)?;
    let first = smooth.iter().position(Option::is_some).ok_or(Error::NoData)?;
    let last = smooth.iter().rposition(Option::is_some).ok_or(Error::NoData)?;
    let mut force = Vec::with_capacity(last - first + 1);
    for k in first..=last {
        force.push(smooth[k].ok_or(Error::CoverageGap(grid[k]))?);
    }
    let grid = grid[first..=last].to_vec();
    let potential = if grid.len() >= 2 {
        potential(&grid, &force)?
    } else {
        vec![0.0]
    };
    Ok(PotentialCurve {
        t_lo,
        t_hi,
        n_samples: samples.len(),
        sparse: samples.len() < SPARSE_BIN,
        grid,
        force,
        potential,
    })
}

/// `[0, 0.1), [0.1, 0.2), ..., [0.9, inf)`.
pub fn default_time_bins() -> Vec<(f64, f64)> {
    (0..10)
        .map(|k| {
            let lo = k as f64 / 10.0;
            let hi = if k == 9 { f64::INFINITY } else { (k + 1) as f64 / 10.0 };
            (lo, hi)
        })
        .collect()
}

/// One entry per time bin: a curve, or `None` for a bin with no samples.
/// Bins with fewer than 50 samples still get a curve, flagged sparse.
pub fn landscape_over_time(
    samples: &[ForceSample],
    bins: &[(f64, f64)],
    grid: &[f64],
    h: f64,
) -> Result<Vec<Option<PotentialCurve>>> {
    let mut groups: Vec<Vec<ForceSample>> = vec![Vec::new(); bins.len()];
    for s in samples {
        if let Some(b) = bins.iter().position(|&(lo, hi)| s.t_n >= lo && s.t_n < hi) {
            groups[b].push(*s);
        }
    }
    groups
        .iter()
        .zip(bins)
        .map(|(g, &(lo, hi))| {
            if g.is_empty() {
                Ok(None)
            } else {
                curve(g, grid, h, lo, hi).map(Some)
            }
        })
        .collect()
}
