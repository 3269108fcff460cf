//! Indices computed over states, time series and event logs. Everything here
//! is a pure function of its inputs.

mod distance;
mod homophily;
mod pathway;
mod peaks;
mod structure;
mod summary;

pub use distance::{
    distance_histogram, js_divergence, polarization_indices, reference_distributions,
    DistanceHistogram, IndexCalculator, Indices, PairSource, ReferenceSet, DEFAULT_BINS,
};
pub use homophily::{baseline_rho, homophily, homophily_index, homophily_ratio, BaselineEstimate, MONTE_CARLO_PAIRS};
pub use pathway::{
    activity_time, auc_subjective, pathway_index, regime, rewiring_stats, trajectory_index,
    PathwayClass, Regime, PATHWAY_THRESHOLD,
};
pub use peaks::{gaussian_kde, local_maxima, opinion_peaks, silverman_bandwidth, PEAK_GRID_POINTS};
pub use structure::{closed_triads, community_count, greedy_modularity};
pub use summary::{summarize, FinalState, RunSummary};
