use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::{FinalState, PathwayClass, RunSummary};

use super::execute::{is_complete, JOB_FILE};
use super::grid::{Cell, StrategyVariant};
use super::kde::{kde_pdf, KdeCurve};

/// One completed job as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub cell: Cell,
    pub trial: u32,
    pub seed: u64,
    pub summary: RunSummary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[m]
        } else {
            0.5 * (sorted[m - 1] + sorted[m])
        };
        Some(Stats { mean, median, std })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: Vec<TrialRow>,
    pub i_w: Stats,
    /// Oscillation of `I_p` up to `t_a`, over consensual trials only; `None`
    /// when every trial ended polarized (or the index was undefined).
    pub i_p_trajectory: Option<Stats>,
    pub closed_triads: Stats,
    pub rewire_count: Stats,
    pub rewire_mean_time: Option<Stats>,
    pub auc_i_s: Stats,
    pub polarized_fraction: f64,
    pub sbp_fraction: f64,
}

impl CellSummary {
    fn build(cell: Cell, trials: Vec<TrialRow>) -> Self {
        let col = |f: &dyn Fn(&RunSummary) -> f64| trials.iter().map(|t| f(&t.summary)).collect::<Vec<_>>();
        let n = trials.len() as f64;
        let i_p_traj: Vec<f64> = trials
            .iter()
            .filter(|t| t.summary.final_state == FinalState::Consensual)
            .filter_map(|t| t.summary.i_p_trajectory)
            .collect();
        let rewire_time: Vec<f64> = trials.iter().filter_map(|t| t.summary.rewire_mean_time).collect();
        CellSummary {
            cell,
            i_w: Stats::of(&col(&|s| s.i_w)).expect("cell has trials"),
            i_p_trajectory: Stats::of(&i_p_traj),
            closed_triads: Stats::of(&col(&|s| s.closed_triads as f64)).expect("cell has trials"),
            rewire_count: Stats::of(&col(&|s| s.rewire_count as f64)).expect("cell has trials"),
            rewire_mean_time: Stats::of(&rewire_time),
            auc_i_s: Stats::of(&col(&|s| s.auc_i_s)).expect("cell has trials"),
            polarized_fraction: trials.iter().filter(|t| t.summary.final_state == FinalState::Polarized).count() as f64
                / n,
            sbp_fraction: trials.iter().filter(|t| t.summary.class == PathwayClass::Sbp).count() as f64 / n,
            trials,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Aggregate {
    pub cells: Vec<CellSummary>,
    /// KDE of `I_w` over every trial; `None` with fewer than two trials.
    pub kde_iw: Option<KdeCurve>,
}

#[derive(Deserialize)]
struct JobHeader {
    cell: Cell,
    trial: u32,
    seed: u64,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &'static str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        what,
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Completed jobs under `root/<cell>/<trial>/`. Directories without the
/// completion marker are ignored.
pub fn collect_trials(root: &Path) -> Result<Vec<TrialRow>> {
    let mut rows = Vec::new();
    for cell_dir in sorted_subdirs(root)? {
        for trial_dir in sorted_subdirs(&cell_dir)? {
            if !is_complete(&trial_dir) {
                continue;
            }
            let header: JobHeader = read_json(&trial_dir.join(JOB_FILE), "job header")?;
            let summary: RunSummary = read_json(&trial_dir.join("summary.json"), "run summary")?;
            rows.push(TrialRow {
                cell: header.cell,
                trial: header.trial,
                seed: header.seed,
                summary,
            });
        }
    }
    Ok(rows)
}

fn cell_order(a: &Cell, b: &Cell) -> std::cmp::Ordering {
    a.variant
        .label()
        .cmp(&b.variant.label())
        .then(a.p.total_cmp(&b.p))
        .then(a.alpha.total_cmp(&b.alpha))
        .then(a.q.total_cmp(&b.q))
}

/// Fold completed jobs from one or more output roots. The same job appearing
/// in two roots is an error.
pub fn aggregate(roots: &[PathBuf]) -> Result<Aggregate> {
    let mut by_key: BTreeMap<String, (Cell, BTreeMap<u32, TrialRow>)> = BTreeMap::new();
    for root in roots {
        for row in collect_trials(root)? {
            let entry = by_key.entry(row.cell.key()).or_insert_with(|| (row.cell, BTreeMap::new()));
            if entry.1.contains_key(&row.trial) {
                return Err(Error::Invalid(format!(
                    "job {} trial {} appears in more than one output root",
                    row.cell.key(),
                    row.trial
                )));
            }
            entry.1.insert(row.trial, row);
        }
    }
    if by_key.is_empty() {
        return Err(Error::Invalid("no completed jobs found".into()));
    }
    let mut cells: Vec<CellSummary> = by_key
        .into_values()
        .map(|(cell, trials)| CellSummary::build(cell, trials.into_values().collect()))
        .collect();
    cells.sort_by(|a, b| cell_order(&a.cell, &b.cell));
    let all_iw: Vec<f64> = cells.iter().flat_map(|c| c.trials.iter().map(|t| t.summary.i_w)).collect();
    let kde_iw = if all_iw.len() >= 2 { Some(kde_pdf(&all_iw)?) } else { None };
    Ok(Aggregate { cells, kde_iw })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Heatmap metrics written per `(strategy, p)` slice.
pub const HEATMAP_METRICS: [&str; 3] = ["i_w", "i_p_traj", "closed_triads"];

fn metric(cell: &CellSummary, name: &str) -> Option<f64> {
    match name {
        "i_w" => Some(cell.i_w.mean),
        "i_p_traj" => cell.i_p_trajectory.map(|s| s.mean),
        "closed_triads" => Some(cell.closed_triads.mean),
        _ => None,
    }
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Matrix over `alpha` (rows) and `q` (columns). Missing cells are empty.
fn matrix_csv(alphas: &[f64], qs: &[f64], value: impl Fn(f64, f64) -> Option<f64>) -> String {
    let mut out = String::from("alpha\\q");
    for q in qs {
        let _ = write!(out, ",{q}");
    }
    out.push('\n');
    for &a in alphas {
        let _ = write!(out, "{a}");
        for &q in qs {
            let _ = write!(out, ",{}", opt(value(a, q)));
        }
        out.push('\n');
    }
    out
}

impl Aggregate {
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "variant,strategy,k_h,p,alpha,q,trial,seed,stop_step,stop_reason,i_w,class,t_a,i_p_traj,i_h_traj,\
             final_rho,final_i_h,final_i_p,final_i_s,closed_triads,rewire_count,rewire_mean_time,auc_i_s,\
             opinion_peaks,communities,final_state,d,regime\n",
        );
        for c in &self.cells {
            for t in &c.trials {
                let s = &t.summary;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.cell.variant.label(),
                    c.cell.variant.strategy,
                    c.cell.variant.k_h,
                    c.cell.p,
                    c.cell.alpha,
                    c.cell.q,
                    t.trial,
                    t.seed,
                    s.stop_step,
                    s.stop_reason.as_str(),
                    s.i_w,
                    s.class.as_str(),
                    s.t_a,
                    opt(s.i_p_trajectory),
                    opt(s.i_h_trajectory),
                    s.final_rho,
                    s.final_i_h,
                    s.final_i_p,
                    s.final_i_s,
                    s.closed_triads,
                    s.rewire_count,
                    opt(s.rewire_mean_time),
                    s.auc_i_s,
                    s.opinion_peaks,
                    s.communities,
                    s.final_state.as_str(),
                    opt(s.d),
                    s.regime.map(|r| r.as_str()).unwrap_or_default(),
                );
            }
        }
        out
    }

    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "variant,p,alpha,q,trials,i_w_mean,i_w_median,i_w_std,i_p_traj_mean,i_p_traj_median,i_p_traj_std,\
             triads_mean,triads_median,triads_std,rewire_count_mean,rewire_time_mean,auc_i_s_mean,\
             polarized_fraction,sbp_fraction\n",
        );
        for c in &self.cells {
            let ip = c.i_p_trajectory;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.cell.variant.label(),
                c.cell.p,
                c.cell.alpha,
                c.cell.q,
                c.trials.len(),
                c.i_w.mean,
                c.i_w.median,
                c.i_w.std,
                opt(ip.map(|s| s.mean)),
                opt(ip.map(|s| s.median)),
                opt(ip.map(|s| s.std)),
                c.closed_triads.mean,
                c.closed_triads.median,
                c.closed_triads.std,
                c.rewire_count.mean,
                opt(c.rewire_mean_time.map(|s| s.mean)),
                c.auc_i_s.mean,
                c.polarized_fraction,
                c.sbp_fraction,
            );
        }
        out
    }

    fn variants(&self) -> Vec<StrategyVariant> {
        let mut v: Vec<StrategyVariant> = Vec::new();
        for c in &self.cells {
            if !v.contains(&c.cell.variant) {
                v.push(c.cell.variant);
            }
        }
        v
    }

    fn find(&self, variant: StrategyVariant, p: f64, alpha: f64, q: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.cell.variant == variant && c.cell.p == p && c.cell.alpha == alpha && c.cell.q == q)
    }

    /// `(file name, contents)` for every heatmap and strategy-difference matrix.
    pub fn matrices(&self) -> Vec<(String, String)> {
        let alphas = sorted_unique(self.cells.iter().map(|c| c.cell.alpha));
        let qs = sorted_unique(self.cells.iter().map(|c| c.cell.q));
        let ps = sorted_unique(self.cells.iter().map(|c| c.cell.p));
        let variants = self.variants();
        let mut out = Vec::new();
        for &m in &HEATMAP_METRICS {
            for &v in &variants {
                for &p in &ps {
                    if !self.cells.iter().any(|c| c.cell.variant == v && c.cell.p == p) {
                        continue;
                    }
                    let body = matrix_csv(&alphas, &qs, |a, q| self.find(v, p, a, q).and_then(|c| metric(c, m)));
                    out.push((format!("heatmap_{m}_{}_p{p}.csv", v.label()), body));
                }
            }
            for (i, &va) in variants.iter().enumerate() {
                for &vb in &variants[i + 1..] {
                    for &p in &ps {
                        let body = matrix_csv(&alphas, &qs, |a, q| {
                            let x = self.find(va, p, a, q).and_then(|c| metric(c, m))?;
                            let y = self.find(vb, p, a, q).and_then(|c| metric(c, m))?;
                            Some(x - y)
                        });
                        out.push((format!("diff_{m}_{}_minus_{}_p{p}.csv", va.label(), vb.label()), body));
                    }
                }
            }
        }
        out
    }

    pub fn kde_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        if let Some(k) = &self.kde_iw {
            for (x, d) in k.grid.iter().zip(&k.density) {
                let _ = writeln!(out, "{x},{d}");
            }
        }
        out
    }

    /// Write `runs.csv`, `cells.csv`, the matrices and `kde_iw.csv` into `out`.
    pub fn write(&self, out: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let mut files = vec![
            ("runs.csv".to_string(), self.runs_csv()),
            ("cells.csv".to_string(), self.cells_csv()),
            ("kde_iw.csv".to_string(), self.kde_csv()),
        ];
        files.extend(self.matrices());
        let mut written = Vec::new();
        for (name, body) in files {
            let path = out.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
