//! Parameter sweeps: grid expansion, seeding, resumable execution and
//! aggregation into heatmap and KDE tables.

mod aggregate;
mod execute;
mod grid;
mod kde;
mod seed;

pub use aggregate::{aggregate, collect_trials, Aggregate, CellSummary, Stats, TrialRow, HEATMAP_METRICS};
pub use execute::{execute, is_complete, ExecuteOptions, ExecuteReport, Progress, DONE_MARKER, JOB_FILE};
pub use grid::{expand_grid, job_identity, Axes, Cell, FixedParams, Job, StrategyVariant, SweepConfig, SweepRecordLevel};
pub use kde::{kde_pdf, scott_bandwidth, KdeCurve, KDE_GRID_POINTS};
pub use seed::{derive_seed, fnv1a64};

use crate::config::{BaselineFormula, Strategy};
use crate::error::{Error, Result};

/// Eight roughly log-spaced values spanning `[0.005, 1]`, shared by `alpha` and `q`.
pub const PAPER_RATES: [f64; 8] = [0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0];
/// Every other entry of [`PAPER_RATES`].
pub const MINI_RATES: [f64; 4] = [0.005, 0.025, 0.1, 0.5];

pub const PRESETS: [&str; 2] = ["paper-mini", "paper-full"];

pub fn preset(name: &str) -> Result<SweepConfig> {
    match name {
        "paper-mini" => Ok(SweepConfig {
            schema_version: 1,
            axes: Axes {
                strategy: vec![
                    StrategyVariant::new(Strategy::Structure, 0),
                    StrategyVariant::new(Strategy::Opinion, 0),
                ],
                p: vec![0.0, 0.1],
                alpha: MINI_RATES.to_vec(),
                q: MINI_RATES.to_vec(),
            },
            trials: 5,
            base_seed: 0,
            fixed: FixedParams {
                epsilon: 0.45,
                n: 200,
                k_o: 15.0,
                k_r: 10,
                max_steps: 5_000,
                quiet_steps: 60,
                opinion_tol: 1e-7,
                baseline_formula: BaselineFormula::Paper,
            },
            parallelism: None,
            record_level: SweepRecordLevel::Summary,
        }),
        "paper-full" => Ok(SweepConfig {
            schema_version: 1,
            axes: Axes {
                strategy: vec![
                    StrategyVariant::new(Strategy::Structure, 0),
                    StrategyVariant::new(Strategy::Opinion, 0),
                    StrategyVariant::new(Strategy::Opinion, 2),
                    StrategyVariant::new(Strategy::Opinion, 6),
                ],
                p: vec![0.0, 0.1, 0.2, 0.5],
                alpha: PAPER_RATES.to_vec(),
                q: PAPER_RATES.to_vec(),
            },
            trials: 20,
            base_seed: 0,
            fixed: FixedParams {
                epsilon: 0.45,
                n: 500,
                k_o: 15.0,
                k_r: 10,
                max_steps: 20_000,
                quiet_steps: 60,
                opinion_tol: 1e-7,
                baseline_formula: BaselineFormula::Paper,
            },
            parallelism: None,
            record_level: SweepRecordLevel::Summary,
        }),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}`, expected one of {}", PRESETS.join(", ")),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn paper_grid_size_and_unique_seeds() {
        let full = preset("paper-full").unwrap();
        assert_eq!(full.cells().len(), 1024);
        let jobs = expand_grid(&full).unwrap();
        assert_eq!(jobs.len(), 20_480);
        let seeds: HashSet<u64> = jobs.iter().map(|j| j.seed).collect();
        assert_eq!(seeds.len(), jobs.len());
    }

    #[test]
    fn ordering_and_counts() {
        let mut s = preset("paper-mini").unwrap();
        s.axes.strategy.truncate(1);
        s.axes.p.truncate(1);
        s.axes.alpha = vec![0.01, 0.02];
        s.axes.q = vec![0.1, 0.2];
        s.trials = 3;
        let jobs = expand_grid(&s).unwrap();
        assert_eq!(jobs.len(), 12);
        let order: Vec<(f64, f64, u32)> = jobs.iter().map(|j| (j.cell.alpha, j.cell.q, j.trial)).collect();
        assert_eq!(order[0], (0.01, 0.1, 0));
        assert_eq!(order[2], (0.01, 0.1, 2));
        assert_eq!(order[3], (0.01, 0.2, 0));
        assert_eq!(order[6], (0.02, 0.1, 0));
        assert_ne!(jobs[0].seed, jobs[1].seed);

        s.axes.alpha = vec![0.05];
        s.axes.q = vec![0.05];
        s.trials = 1;
        assert_eq!(expand_grid(&s).unwrap().len(), 1);

        s.axes.q.clear();
        assert!(expand_grid(&s).is_err());
    }

    #[test]
    fn sweep_json_roundtrip() {
        let s = preset("paper-mini").unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(SweepConfig::from_json(&text).unwrap(), s);
        assert!(SweepConfig::from_json(&text.replace("\"trials\":5", "\"trials\":0")).is_err());
        assert!(preset("nope").is_err());
    }
}
