//! Interactive sessions: a simulation plus a control state machine, an
//! intervention queue drained at step boundaries, and the wire messages the
//! live service broadcasts. Nothing here touches threads or sockets.
//!
//! Every message carries `"v": 1`. Index messages go out after every step
//! of a `step` command, every 10th step while running, and whenever the
//! session pauses or finishes between reporting points.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::graph::FollowGraph;
use crate::metrics::pathway_index;
use crate::record::{InterventionEvent, InterventionKind, RunRecord, StopReason};
use crate::sim::{RunOptions, Simulation};
use crate::AgentId;

pub const MESSAGE_VERSION: u32 = 1;
pub const RUNNING_REPORT_INTERVAL: u32 = 10;
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Running,
    Paused,
    Finished,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Control {
    Resume,
    Pause,
    Step { n: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexMessage {
    pub v: u32,
    pub step: u32,
    pub rho: f64,
    pub i_h: f64,
    pub i_p: f64,
    pub i_s: f64,
    /// Pathway index over the trajectory so far; provisional until the run stops.
    pub i_w: f64,
    /// Opinion counts in 50 equal bins over `[-1, 1]`.
    pub histogram: Vec<u32>,
    /// Rewire events since the previous index message.
    pub rewires: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Indices(IndexMessage),
    Intervention {
        v: u32,
        event: InterventionEvent,
    },
    Mode {
        v: u32,
        step: u32,
        mode: Mode,
    },
    Finished {
        v: u32,
        step: u32,
        stop_reason: StopReason,
        i_w: f64,
    },
}

impl Message {
    pub fn step(&self) -> u32 {
        match self {
            Message::Indices(m) => m.step,
            Message::Intervention { event, .. } => event.step,
            Message::Mode { step, .. } | Message::Finished { step, .. } => *step,
        }
    }
}

/// Full state view returned by the snapshot endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotView {
    pub v: u32,
    pub step: u32,
    pub mode: Mode,
    /// Parameters currently in force, after any interventions.
    pub config: ScenarioConfig,
    pub indices: IndexMessage,
    pub opinions: Vec<f64>,
    pub edges: Vec<(AgentId, AgentId)>,
    pub interventions: Vec<InterventionEvent>,
}

pub fn opinion_histogram(opinions: &[f64], bins: usize) -> Vec<u32> {
    let mut h = vec![0u32; bins];
    for &x in opinions {
        let k = (((x + 1.0) / 2.0) * bins as f64) as usize;
        h[k.min(bins - 1)] += 1;
    }
    h
}

pub struct Session {
    sim: Simulation,
    mode: Mode,
    pending: Vec<InterventionKind>,
    trajectory: Vec<(f64, f64)>,
    rewires_since_report: usize,
    last_reported: Option<u32>,
}

impl Session {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let sim = Simulation::new(config, RunOptions::default())?;
        let ix = sim.indices();
        Ok(Session {
            sim,
            mode: Mode::Paused,
            pending: Vec::new(),
            trajectory: vec![(ix.i_p, ix.i_h)],
            rewires_since_report: 0,
            last_reported: None,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn step(&self) -> u32 {
        self.sim.step()
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn running_i_w(&self) -> f64 {
        pathway_index(&self.trajectory)
    }

    pub fn latest(&self) -> IndexMessage {
        let ix = self.sim.indices();
        IndexMessage {
            v: MESSAGE_VERSION,
            step: self.sim.step(),
            rho: ix.rho,
            i_h: ix.i_h,
            i_p: ix.i_p,
            i_s: ix.i_s,
            i_w: self.running_i_w(),
            histogram: opinion_histogram(self.sim.opinions(), HISTOGRAM_BINS),
            rewires: self.rewires_since_report,
        }
    }

    fn report(&mut self, out: &mut Vec<Message>) {
        if self.last_reported == Some(self.sim.step()) {
            return;
        }
        out.push(Message::Indices(self.latest()));
        self.rewires_since_report = 0;
        self.last_reported = Some(self.sim.step());
    }

    /// The first message a new subscriber receives.
    pub fn hello(&self) -> Vec<Message> {
        let mut out = vec![Message::Indices(self.latest())];
        if self.mode == Mode::Finished {
            out.push(self.finished_message());
        }
        out
    }

    fn finished_message(&self) -> Message {
        Message::Finished {
            v: MESSAGE_VERSION,
            step: self.sim.step(),
            stop_reason: self.sim.stop_reason().unwrap_or(StopReason::MaxSteps),
            i_w: self.running_i_w(),
        }
    }

    /// Queue an intervention for the next step boundary.
    pub fn intervene(&mut self, kind: InterventionKind) -> Result<()> {
        if self.mode == Mode::Finished {
            return Err(Error::Invalid("session has finished".into()));
        }
        kind.validate()?;
        self.pending.push(kind);
        Ok(())
    }

    pub fn control(&mut self, action: Control) -> Result<Vec<Message>> {
        let mut out = Vec::new();
        match action {
            Control::Resume => {
                if self.mode == Mode::Finished {
                    out.push(self.finished_message());
                } else if self.mode != Mode::Running {
                    self.mode = Mode::Running;
                    out.push(self.mode_message());
                }
            }
            Control::Pause => {
                if self.mode == Mode::Running {
                    self.mode = Mode::Paused;
                    self.report(&mut out);
                    out.push(self.mode_message());
                }
            }
            Control::Step { n } => {
                if self.mode == Mode::Finished {
                    return Err(Error::Invalid("session has finished".into()));
                }
                self.mode = Mode::Paused;
                for _ in 0..n {
                    self.advance(&mut out, 1)?;
                    if self.mode == Mode::Finished {
                        break;
                    }
                }
                if self.mode != Mode::Finished {
                    out.push(self.mode_message());
                }
            }
        }
        Ok(out)
    }

    /// One step while running; a no-op otherwise.
    pub fn tick(&mut self) -> Result<Vec<Message>> {
        let mut out = Vec::new();
        if self.mode == Mode::Running {
            self.advance(&mut out, RUNNING_REPORT_INTERVAL)?;
        }
        Ok(out)
    }

    fn mode_message(&self) -> Message {
        Message::Mode {
            v: MESSAGE_VERSION,
            step: self.sim.step(),
            mode: self.mode,
        }
    }

    fn advance(&mut self, out: &mut Vec<Message>, interval: u32) -> Result<()> {
        for kind in std::mem::take(&mut self.pending) {
            let event = self.sim.apply_intervention(kind)?;
            out.push(Message::Intervention {
                v: MESSAGE_VERSION,
                event,
            });
        }
        let rec = self.sim.advance()?;
        self.rewires_since_report += rec.rewires.len();
        self.trajectory.push((rec.indices.i_p, rec.indices.i_h));
        if self.sim.step().is_multiple_of(interval) || self.sim.is_finished() {
            self.report(out);
        }
        if self.sim.is_finished() {
            self.mode = Mode::Finished;
            out.push(self.finished_message());
        }
        Ok(())
    }

    pub fn snapshot(&self) -> SnapshotView {
        SnapshotView {
            v: MESSAGE_VERSION,
            step: self.sim.step(),
            mode: self.mode,
            config: self.sim.config().clone(),
            indices: self.latest(),
            opinions: self.sim.opinions().to_vec(),
            edges: self.sim.graph().edges().collect(),
            interventions: self.sim.record_interventions(),
        }
    }

    pub fn record(&self) -> RunRecord {
        self.sim.record()
    }

    pub fn graph(&self) -> &FollowGraph {
        self.sim.graph()
    }
}
