//! Run records and their on-disk layout.
//!
//! A record directory holds:
//!
//! - `config.json`: the scenario the run started from
//! - `series.csv`: `step,rho,I_h,I_p,I_s`, one row per step `0..=T`
//! - `events.jsonl`: one type-tagged event per line, sorted by step
//! - `opinions.bin`: opinion snapshots (see [`write_snapshots`])
//! - `samples.csv`: `t_n,x,nod,fod` force samples
//! - `final_state.json`: stop step, stop reason, final opinions and edges
//! - `summary.json`: the [`RunSummary`](crate::metrics::RunSummary)

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{check_unit, ScenarioConfig, Strategy};
use crate::error::{Error, Result};
use crate::graph::FollowGraph;
use crate::metrics::{activity_time, summarize};
use crate::AgentId;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"EHKM";
pub const SNAPSHOT_VERSION: u16 = 1;
/// Runs longer than this keep every `ceil(T / MAX_FULL_SNAPSHOTS)`-th snapshot.
pub const MAX_FULL_SNAPSHOTS: u32 = 2000;
/// Largest recommender window an intervention may request.
pub const MAX_SWITCH_WINDOW: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewireEvent {
    pub step: u32,
    pub agent: AgentId,
    pub unfollowed: AgentId,
    pub followed: AgentId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    P,
    Q,
    Alpha,
}

impl Param {
    pub fn as_str(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Q => "q",
            Param::Alpha => "alpha",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterventionKind {
    SetStrategy {
        strategy: Strategy,
        #[serde(default)]
        k_h: usize,
    },
    SetParam {
        param: Param,
        value: f64,
    },
}

impl InterventionKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InterventionKind::SetStrategy { k_h, .. } if k_h > MAX_SWITCH_WINDOW => Err(Error::config(
                "k_h",
                format!("switching supports windows up to {MAX_SWITCH_WINDOW}, got {k_h}"),
            )),
            InterventionKind::SetStrategy { .. } => Ok(()),
            InterventionKind::SetParam { param, value } => check_unit(param.as_str(), value),
        }
    }
}

/// An operator action taking effect at the start of `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionEvent {
    pub step: u32,
    #[serde(flatten)]
    pub kind: InterventionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Rewire(RewireEvent),
    Intervention(InterventionEvent),
}

impl Event {
    pub fn step(&self) -> u32 {
        match self {
            Event::Rewire(e) => e.step,
            Event::Intervention(e) => e.step,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexPoint {
    pub step: u32,
    pub rho: f64,
    pub i_h: f64,
    pub i_p: f64,
    pub i_s: f64,
}

/// Opinion snapshots every `stride` steps starting at step 0, row-major.
/// Equality is bitwise, so NaN markers compare equal.
#[derive(Clone, Debug, Default)]
pub struct Snapshots {
    pub n: usize,
    pub stride: u32,
    pub data: Vec<f32>,
    /// Mean concordant-followee deviation per agent at each snapshot step
    /// before `T`; NaN where the agent had no concordant followee post.
    pub fod: Vec<f32>,
}

impl Snapshots {
    pub fn count(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.data.len() / self.n
        }
    }

    pub fn row(&self, k: usize) -> &[f32] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn fod_rows(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.fod.len() / self.n
        }
    }

    pub fn fod_row(&self, k: usize) -> &[f32] {
        &self.fod[k * self.n..(k + 1) * self.n]
    }
}

impl PartialEq for Snapshots {
    fn eq(&self, other: &Self) -> bool {
        let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.n == other.n
            && self.stride == other.stride
            && bits(&self.data) == bits(&other.data)
            && bits(&self.fod) == bits(&other.fod)
    }
}

/// Snapshot stride for a run of `t` steps.
pub fn snapshot_stride(t: u32) -> u32 {
    if t <= MAX_FULL_SNAPSHOTS {
        1
    } else {
        t.div_ceil(MAX_FULL_SNAPSHOTS)
    }
}

/// Everything a finished run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub index_series: Vec<IndexPoint>,
    pub events: Vec<Event>,
    pub snapshots: Option<Snapshots>,
    pub stop_step: u32,
    pub stop_reason: StopReason,
    pub final_opinions: Vec<f64>,
    pub final_graph: FollowGraph,
}

/// One row of `samples.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRow {
    pub step: u32,
    pub t_n: f64,
    pub x: f64,
    pub nod: Option<f64>,
    pub fod: Option<f64>,
}

/// Which files to write.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RecordLevel {
    #[default]
    Full,
    /// Skip `opinions.bin` and `samples.csv`.
    Summary,
}

#[derive(Serialize, Deserialize)]
struct FinalState {
    step: u32,
    stop_reason: StopReason,
    opinions: Vec<f64>,
    edges: Vec<(AgentId, AgentId)>,
}

impl RunRecord {
    pub fn series(&self, f: impl Fn(&IndexPoint) -> f64) -> Vec<f64> {
        self.index_series.iter().map(f).collect()
    }

    pub fn rewire_events(&self) -> impl Iterator<Item = &RewireEvent> {
        self.events.iter().filter_map(|e| match e {
            Event::Rewire(r) => Some(r),
            Event::Intervention(_) => None,
        })
    }

    pub fn interventions(&self) -> impl Iterator<Item = &InterventionEvent> {
        self.events.iter().filter_map(|e| match e {
            Event::Intervention(i) => Some(i),
            Event::Rewire(_) => None,
        })
    }

    pub fn activity_time(&self) -> usize {
        activity_time(&self.series(|p| p.i_s), self.stop_step as usize)
    }

    /// Force samples at every snapshot step before `T`. NOD divides the
    /// displacement to the next snapshot by `alpha * stride`; it is `None`
    /// past the last full stride or when `alpha` is zero.
    pub fn sample_rows(&self, alpha: f64) -> Vec<SampleRow> {
        let Some(snap) = &self.snapshots else {
            return Vec::new();
        };
        let t_a = self.activity_time().max(1) as f64;
        let s = snap.stride;
        let count = snap.count();
        let mut rows = Vec::new();
        for k in 0..count {
            let step = k as u32 * s;
            if step >= self.stop_step {
                break;
            }
            let x = snap.row(k);
            let next = (k + 1 < count && alpha > 0.0).then(|| snap.row(k + 1));
            let fod = (k < snap.fod_rows()).then(|| snap.fod_row(k));
            for i in 0..snap.n {
                let nod = next.map(|nx| (nx[i] as f64 - x[i] as f64) / (alpha * s as f64));
                let f = fod.map(|r| r[i]).filter(|v| !v.is_nan()).map(f64::from);
                rows.push(SampleRow {
                    step,
                    t_n: step as f64 / t_a,
                    x: x[i] as f64,
                    nod,
                    fod: f,
                });
            }
        }
        rows
    }

    pub fn save(&self, dir: &Path, level: RecordLevel) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        write_file(&dir.join("config.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &self.config)?;
            writeln!(w).map_err(|e| Error::io(dir.join("config.json"), e))
        })?;

        let series_path = dir.join("series.csv");
        write_file(&series_path, |w| {
            let io = |e| Error::io(&series_path, e);
            writeln!(w, "step,rho,I_h,I_p,I_s").map_err(io)?;
            for p in &self.index_series {
                writeln!(w, "{},{},{},{},{}", p.step, p.rho, p.i_h, p.i_p, p.i_s).map_err(io)?;
            }
            Ok(())
        })?;

        let events_path = dir.join("events.jsonl");
        write_file(&events_path, |w| {
            for e in &self.events {
                serde_json::to_writer(&mut *w, e)?;
                writeln!(w).map_err(|e| Error::io(&events_path, e))?;
            }
            Ok(())
        })?;

        if level == RecordLevel::Full {
            if let Some(snap) = &self.snapshots {
                write_file(&dir.join("opinions.bin"), |w| {
                    write_snapshots(w, snap).map_err(|e| Error::io(dir.join("opinions.bin"), e))
                })?;
                let samples_path = dir.join("samples.csv");
                write_file(&samples_path, |w| {
                    let io = |e| Error::io(&samples_path, e);
                    writeln!(w, "t_n,x,nod,fod").map_err(io)?;
                    for r in self.sample_rows(self.config.alpha) {
                        writeln!(w, "{},{},{},{}", r.t_n, r.x, opt(r.nod), opt(r.fod)).map_err(io)?;
                    }
                    Ok(())
                })?;
            }
        }

        let state = FinalState {
            step: self.stop_step,
            stop_reason: self.stop_reason,
            opinions: self.final_opinions.clone(),
            edges: self.final_graph.edges().collect(),
        };
        write_file(&dir.join("final_state.json"), |w| {
            serde_json::to_writer(&mut *w, &state)?;
            writeln!(w).map_err(|e| Error::io(dir.join("final_state.json"), e))
        })?;

        let summary = summarize(self)?;
        write_file(&dir.join("summary.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)?;
            writeln!(w).map_err(|e| Error::io(dir.join("summary.json"), e))
        })?;
        Ok(())
    }

    /// Read a record directory. `opinions.bin` and `samples.csv` are optional.
    pub fn load(dir: &Path) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(&read_text(&dir.join("config.json"))?)
            .map_err(|e| format_error("config", dir.join("config.json"), e))?;

        let series_path = dir.join("series.csv");
        let mut index_series = Vec::new();
        for (lineno, line) in read_text(&series_path)?.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || format_error("series row", series_path.clone(), format!("line {}", lineno + 1));
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            index_series.push(IndexPoint {
                step: f[0].parse().map_err(|_| bad())?,
                rho: num(f[1])?,
                i_h: num(f[2])?,
                i_p: num(f[3])?,
                i_s: num(f[4])?,
            });
        }

        let events_path = dir.join("events.jsonl");
        let mut events = Vec::new();
        for line in read_text(&events_path)?.lines().filter(|l| !l.is_empty()) {
            events.push(serde_json::from_str(line).map_err(|e| format_error("event", events_path.clone(), e))?);
        }

        let state_path = dir.join("final_state.json");
        let state: FinalState =
            serde_json::from_str(&read_text(&state_path)?).map_err(|e| format_error("final state", state_path.clone(), e))?;
        let final_graph = FollowGraph::from_edges(config.n, state.edges)
            .map_err(|e| format_error("final state", state_path, e))?;

        let bin_path = dir.join("opinions.bin");
        let snapshots = if bin_path.exists() {
            let file = fs::File::open(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
            let mut snap = read_snapshots(&mut BufReader::new(file))
                .map_err(|e| format_error("snapshot file", bin_path.clone(), e))?;
            let samples_path = dir.join("samples.csv");
            if samples_path.exists() {
                snap.fod = read_fod_column(&samples_path)?;
            }
            Some(snap)
        } else {
            None
        };

        Ok(RunRecord {
            config,
            index_series,
            events,
            snapshots,
            stop_step: state.step,
            stop_reason: state.stop_reason,
            final_opinions: state.opinions,
            final_graph,
        })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn format_error(what: &'static str, path: PathBuf, reason: impl std::fmt::Display) -> Error {
    Error::Format {
        what,
        path,
        reason: reason.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_fod_column(path: &Path) -> Result<Vec<f32>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let field = line.rsplit(',').next().unwrap_or("");
        if field.is_empty() {
            out.push(f32::NAN);
        } else {
            let v: f64 = field
                .parse()
                .map_err(|_| format_error("sample row", path.to_path_buf(), format!("line {}", lineno + 1)))?;
            out.push(v as f32);
        }
    }
    Ok(out)
}

/// Header: magic `EHKM`, version u16, n u32, snapshot count u32, stride u32,
/// then `count * n` f32 values row-major. All little-endian.
pub fn write_snapshots(w: &mut impl Write, snap: &Snapshots) -> std::io::Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(snap.n as u32).to_le_bytes())?;
    w.write_all(&(snap.count() as u32).to_le_bytes())?;
    w.write_all(&snap.stride.to_le_bytes())?;
    for v in &snap.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshots(r: &mut impl Read) -> std::result::Result<Snapshots, String> {
    let mut header = [0u8; 18];
    r.read_exact(&mut header).map_err(|e| e.to_string())?;
    if &header[..4] != SNAPSHOT_MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != SNAPSHOT_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let (n, count, stride) = (word(6) as usize, word(10) as usize, word(14));
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| e.to_string())?;
    if bytes.len() != n * count * 4 {
        return Err(format!("expected {} data bytes, found {}", n * count * 4, bytes.len()));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshots {
        n,
        stride,
        data,
        fod: Vec::new(),
    })
}
