//! Agent-based opinion dynamics on a rewiring follower network.
//!
//! Agents hold a scalar opinion in `[-1, 1]`, read posts from their followees
//! plus a recommended slate, move toward the concordant ones (bounded
//! confidence), swap discordant followees for concordant recommended authors,
//! and emit one post per step. The crate also carries the measurement stack
//! (homophily, polarization, pathway and activity indices), potential
//! landscape reconstruction, a parameter-sweep harness, and the session
//! machinery behind the live intervention service.

pub mod config;
pub mod error;
pub mod graph;
pub mod landscape;
pub mod metrics;
pub mod post;
pub mod recommend;
pub mod record;
pub mod rng;
pub mod session;
pub mod sim;
pub mod sweep;

pub use config::{BaselineFormula, ScenarioConfig, Strategy};
pub use error::{Error, Result};
pub use graph::FollowGraph;
pub use post::Post;
pub use record::{
    Event, IndexPoint, InterventionEvent, InterventionKind, Param, RecordLevel, RewireEvent, RunRecord, Snapshots,
    StopReason,
};
pub use sim::{run, run_with, RunOptions, Simulation};

/// Agent identifier. Agents are numbered `0..n`.
pub type AgentId = u32;
