//! Trajectory-level indices: pathway area, oscillation, activity time,
//! rewiring statistics and the influence/rewiring regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::RewireEvent;

/// `I_w` at or above this value classifies a run as segregation-before-polarization.
pub const PATHWAY_THRESHOLD: f64 = 0.6;

const DEGENERATE_NET_CHANGE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathwayClass {
    /// Polarization before segregation.
    #[serde(rename = "PbS")]
    Pbs,
    /// Segregation before polarization.
    #[serde(rename = "SbP")]
    Sbp,
}

impl PathwayClass {
    pub fn classify(i_w: f64) -> Self {
        if i_w >= PATHWAY_THRESHOLD {
            PathwayClass::Sbp
        } else {
            PathwayClass::Pbs
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathwayClass::Pbs => "PbS",
            PathwayClass::Sbp => "SbP",
        }
    }
}

/// Signed line integral of `I_h dI_p` along a polyline of `(I_p, I_h)`
/// points, trapezoidal in `I_h`.
pub fn pathway_index(trajectory: &[(f64, f64)]) -> f64 {
    trajectory
        .windows(2)
        .map(|w| {
            let (p0, h0) = w[0];
            let (p1, h1) = w[1];
            0.5 * (h0 + h1) * (p1 - p0)
        })
        .sum()
}

/// Total variation of `series` over `[0, t]` divided by its net change.
/// `None` when the net change is below 1e-9 in magnitude.
pub fn trajectory_index(series: &[f64], t: usize) -> Option<f64> {
    if t == 0 || t >= series.len() {
        return None;
    }
    let net = series[t] - series[0];
    if net.abs() < DEGENERATE_NET_CHANGE {
        return None;
    }
    let tv: f64 = series[..=t].windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Some(tv / net)
}

/// Earliest step whose subjective index reaches `max(0.98 * I_s(T), 0.75)`,
/// or `T` if none does.
pub fn activity_time(i_s: &[f64], final_step: usize) -> usize {
    let Some(&last) = i_s.get(final_step) else {
        return final_step;
    };
    let threshold = (0.98 * last).max(0.75);
    i_s[..=final_step]
        .iter()
        .position(|&v| v >= threshold)
        .unwrap_or(final_step)
}

/// Event count and mean `step / t_a`. Events past `t_a` keep their >1 value.
pub fn rewiring_stats(events: &[RewireEvent], t_a: usize) -> (usize, Option<f64>) {
    if events.is_empty() || t_a == 0 {
        return (events.len(), None);
    }
    let mean = events.iter().map(|e| e.step as f64).sum::<f64>() / (events.len() as f64 * t_a as f64);
    (events.len(), Some(mean))
}

/// Trapezoidal area under `I_s` over `[0, t_a]`, divided by `t_a`.
pub fn auc_subjective(i_s: &[f64], t_a: usize) -> f64 {
    if t_a == 0 || i_s.is_empty() {
        return 0.0;
    }
    let end = t_a.min(i_s.len() - 1);
    let area: f64 = i_s[..=end].windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
    area / t_a as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    RewiringParamount,
    RewiringDominant,
    Balanced,
    InfluenceDominant,
    InfluenceParamount,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::RewiringParamount => "rewiring-paramount",
            Regime::RewiringDominant => "rewiring-dominant",
            Regime::Balanced => "balanced",
            Regime::InfluenceDominant => "influence-dominant",
            Regime::InfluenceParamount => "influence-paramount",
        }
    }
}

/// `D = log10 q - log10 alpha` and its regime label.
pub fn regime(alpha: f64, q: f64) -> Result<(f64, Regime)> {
    if !(alpha > 0.0) || !(q > 0.0) {
        return Err(Error::Invalid(format!(
            "regime needs positive alpha and q, got alpha = {alpha}, q = {q}"
        )));
    }
    let d = q.log10() - alpha.log10();
    let label = if d >= 1.5 {
        Regime::RewiringParamount
    } else if d >= 0.5 {
        Regime::RewiringDominant
    } else if d > -0.5 {
        Regime::Balanced
    } else if d > -1.5 {
        Regime::InfluenceDominant
    } else {
        Regime::InfluenceParamount
    };
    Ok((d, label))
}
