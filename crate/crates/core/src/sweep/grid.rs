use serde::{Deserialize, Serialize};

use crate::config::{check_unit, BaselineFormula, ScenarioConfig, Strategy, CONFIG_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::recommend::RecommenderKind;
use crate::record::RecordLevel;

use super::seed::derive_seed;

/// A strategy plus its window, e.g. `opinion` with `k_h = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyVariant {
    pub strategy: Strategy,
    #[serde(default)]
    pub k_h: usize,
}

impl StrategyVariant {
    pub fn new(strategy: Strategy, k_h: usize) -> Self {
        StrategyVariant { strategy, k_h }
    }

    /// `random`, `structure`, or `opinion-kh<k_h>`.
    pub fn label(&self) -> String {
        match self.strategy {
            Strategy::Opinion => format!("opinion-kh{}", self.k_h),
            s => s.as_str().to_string(),
        }
    }

    pub fn kind(&self) -> RecommenderKind {
        RecommenderKind::new(self.strategy, self.k_h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub strategy: Vec<StrategyVariant>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    pub q: Vec<f64>,
}

/// Parameters shared by every job in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub epsilon: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k_o")]
    pub k_o: f64,
    #[serde(default = "default_k_r")]
    pub k_r: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
    #[serde(default = "default_quiet_steps")]
    pub quiet_steps: u32,
    #[serde(default = "default_opinion_tol")]
    pub opinion_tol: f64,
    #[serde(default)]
    pub baseline_formula: BaselineFormula,
}

fn default_n() -> usize {
    500
}
fn default_k_o() -> f64 {
    15.0
}
fn default_k_r() -> usize {
    10
}
fn default_max_steps() -> u32 {
    20_000
}
fn default_quiet_steps() -> u32 {
    60
}
fn default_opinion_tol() -> f64 {
    1e-7
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRecordLevel {
    Full,
    #[default]
    Summary,
}

impl From<SweepRecordLevel> for RecordLevel {
    fn from(l: SweepRecordLevel) -> Self {
        match l {
            SweepRecordLevel::Full => RecordLevel::Full,
            SweepRecordLevel::Summary => RecordLevel::Summary,
        }
    }
}

/// Contents of `sweep.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub axes: Axes,
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    pub fixed: FixedParams,
    /// Worker threads; `None` lets the executor decide.
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub record_level: SweepRecordLevel,
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

/// Coordinates of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub variant: StrategyVariant,
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
}

impl Cell {
    /// Directory name, e.g. `opinion-kh2_p0.1_a0.005_q0.025`.
    pub fn key(&self) -> String {
        format!("{}_p{}_a{}_q{}", self.variant.label(), self.p, self.alpha, self.q)
    }

    /// Heatmap slice this cell belongs to, e.g. `structure_p0.1`.
    pub fn slice(&self) -> String {
        format!("{}_p{}", self.variant.label(), self.p)
    }
}

/// One run of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub cell: Cell,
    pub trial: u32,
    pub seed: u64,
    pub config: ScenarioConfig,
}

impl Job {
    /// The string hashed into the job seed.
    pub fn identity(&self) -> String {
        job_identity(&self.cell, self.trial)
    }

    pub fn relative_dir(&self) -> std::path::PathBuf {
        std::path::PathBuf::from(self.cell.key()).join(format!("{:03}", self.trial))
    }
}

/// `<variant>|p=<p>|alpha=<alpha>|q=<q>|trial=<trial>`, numbers in shortest
/// round-trip decimal form.
pub fn job_identity(cell: &Cell, trial: u32) -> String {
    format!(
        "{}|p={}|alpha={}|q={}|trial={}",
        cell.variant.label(),
        cell.p,
        cell.alpha,
        cell.q,
        trial
    )
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::config("sweep", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::config("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        let a = &self.axes;
        for (name, len) in [("strategy", a.strategy.len()), ("p", a.p.len()), ("alpha", a.alpha.len()), ("q", a.q.len())] {
            if len == 0 {
                return Err(Error::config(name, "axis is empty"));
            }
        }
        for &v in &a.p {
            check_unit("p", v)?;
        }
        for &v in &a.alpha {
            check_unit("alpha", v)?;
        }
        for &v in &a.q {
            check_unit("q", v)?;
        }
        if self.parallelism == Some(0) {
            return Err(Error::config("parallelism", "must be at least 1"));
        }
        self.scenario(&Cell { variant: a.strategy[0], p: a.p[0], alpha: a.alpha[0], q: a.q[0] }, 0)
            .validate()
    }

    fn scenario(&self, cell: &Cell, seed: u64) -> ScenarioConfig {
        let f = &self.fixed;
        ScenarioConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            n: f.n,
            k_o: f.k_o,
            epsilon: f.epsilon,
            alpha: cell.alpha,
            q: cell.q,
            p: cell.p,
            k_r: f.k_r,
            k_h: cell.variant.k_h,
            strategy: cell.variant.strategy,
            max_steps: f.max_steps,
            quiet_steps: f.quiet_steps,
            opinion_tol: f.opinion_tol,
            seed,
            baseline_formula: f.baseline_formula,
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        let a = &self.axes;
        let mut out = Vec::with_capacity(a.strategy.len() * a.p.len() * a.alpha.len() * a.q.len());
        for &variant in &a.strategy {
            for &p in &a.p {
                for &alpha in &a.alpha {
                    for &q in &a.q {
                        out.push(Cell { variant, p, alpha, q });
                    }
                }
            }
        }
        out
    }
}

/// Cartesian product strategy x p x alpha x q, with trials innermost.
pub fn expand_grid(sweep: &SweepConfig) -> Result<Vec<Job>> {
    sweep.validate()?;
    let mut jobs = Vec::new();
    for cell in sweep.cells() {
        for trial in 0..sweep.trials {
            let seed = derive_seed(sweep.base_seed, &job_identity(&cell, trial));
            jobs.push(Job {
                cell,
                trial,
                seed,
                config: sweep.scenario(&cell, seed),
            });
        }
    }
    Ok(jobs)
}
