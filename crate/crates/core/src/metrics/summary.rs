use serde::{Deserialize, Serialize};

use super::{
    activity_time, auc_subjective, closed_triads, community_count, opinion_peaks, pathway_index, regime,
    rewiring_stats, trajectory_index, PathwayClass, Regime,
};
use crate::error::Result;
use crate::record::{RewireEvent, RunRecord, StopReason};

/// Final opinion layout: one KDE peak or several.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalState {
    Consensual,
    Polarized,
}

impl FinalState {
    pub fn from_peaks(peaks: usize) -> Self {
        if peaks >= 2 {
            FinalState::Polarized
        } else {
            FinalState::Consensual
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FinalState::Consensual => "consensual",
            FinalState::Polarized => "polarized",
        }
    }
}

/// One row of per-run results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub stop_step: u32,
    pub stop_reason: StopReason,
    pub i_w: f64,
    pub class: PathwayClass,
    pub t_a: usize,
    pub i_p_trajectory: Option<f64>,
    pub i_h_trajectory: Option<f64>,
    pub final_rho: f64,
    pub final_i_h: f64,
    pub final_i_p: f64,
    pub final_i_s: f64,
    pub closed_triads: u64,
    pub rewire_count: usize,
    pub rewire_mean_time: Option<f64>,
    pub auc_i_s: f64,
    pub opinion_peaks: usize,
    pub communities: usize,
    pub final_state: FinalState,
    /// `log10 q - log10 alpha`; absent when either is zero.
    pub d: Option<f64>,
    pub regime: Option<Regime>,
}

pub fn summarize(record: &RunRecord) -> Result<RunSummary> {
    let series = &record.index_series;
    let i_p: Vec<f64> = series.iter().map(|p| p.i_p).collect();
    let i_h: Vec<f64> = series.iter().map(|p| p.i_h).collect();
    let i_s: Vec<f64> = series.iter().map(|p| p.i_s).collect();
    let trajectory: Vec<(f64, f64)> = i_p.iter().copied().zip(i_h.iter().copied()).collect();
    let i_w = pathway_index(&trajectory);
    let t = record.stop_step as usize;
    let t_a = activity_time(&i_s, t);
    let rewires: Vec<RewireEvent> = record.rewire_events().copied().collect();
    let (rewire_count, rewire_mean_time) = rewiring_stats(&rewires, t_a);
    let peaks = opinion_peaks(&record.final_opinions);
    let (d, regime) = match regime(record.config.alpha, record.config.q) {
        Ok((d, r)) => (Some(d), Some(r)),
        Err(_) => (None, None),
    };
    let last = series.last().copied();
    Ok(RunSummary {
        stop_step: record.stop_step,
        stop_reason: record.stop_reason,
        i_w,
        class: PathwayClass::classify(i_w),
        t_a,
        i_p_trajectory: trajectory_index(&i_p, t_a),
        i_h_trajectory: trajectory_index(&i_h, t_a),
        final_rho: last.map_or(f64::NAN, |p| p.rho),
        final_i_h: last.map_or(f64::NAN, |p| p.i_h),
        final_i_p: last.map_or(f64::NAN, |p| p.i_p),
        final_i_s: last.map_or(f64::NAN, |p| p.i_s),
        closed_triads: closed_triads(&record.final_graph),
        rewire_count,
        rewire_mean_time,
        auc_i_s: auc_subjective(&i_s, t_a),
        opinion_peaks: peaks,
        communities: community_count(&record.final_graph),
        final_state: FinalState::from_peaks(peaks),
        d,
        regime,
    })
}
