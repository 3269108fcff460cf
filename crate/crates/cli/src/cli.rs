use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "echo-pathways", version, about = "Opinion dynamics under recommender-driven rewiring")]
pub struct Cli {
    /// Default output root when --out is not given.
    #[arg(long, env = "ECHO_PATHWAYS_OUT", global = true, default_value = "out")]
    pub out_root: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its record.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace a config field, e.g. `alpha=0.005`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// JSON array of interventions to apply at their steps.
        #[arg(long)]
        interventions: Option<PathBuf>,
    },
    /// Execute a parameter grid, skipping jobs that already finished.
    Sweep {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Base seed of the grid.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Tables and figures for a run directory or one or more sweep roots.
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Potential landscapes over normalized time for one run.
    Landscape {
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ForceArg::Nod)]
        force: ForceArg,
        #[arg(long, default_value_t = echo_pathways::landscape::BANDWIDTH)]
        bandwidth: f64,
    },
    /// Host live sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Persist finished sessions under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    PaperMini,
    PaperFull,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperMini => "paper-mini",
            Preset::PaperFull => "paper-full",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ForceArg {
    /// Realized opinion shift per unit influence.
    Nod,
    /// Mean pull of concordant followee posts.
    Fod,
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let root = cli.out_root;
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            overrides,
            interventions,
        } => commands::run::execute(&config, seed, &out.unwrap_or_else(|| root.join("run")), &overrides, interventions.as_deref()),
        Command::Sweep {
            config,
            preset,
            seed,
            out,
            overrides,
            parallelism,
        } => commands::sweep::execute(commands::sweep::SweepArgs {
            config,
            preset: preset.map(Preset::name),
            seed,
            out: out.unwrap_or_else(|| root.join("sweep")),
            overrides,
            parallelism,
        }),
        Command::Analyze { inputs, out } => {
            let out = out.unwrap_or_else(|| root.join("analysis"));
            commands::analyze::execute(&inputs, &out)
        }
        Command::Landscape {
            run,
            out,
            force,
            bandwidth,
        } => commands::landscape::execute(&run, &out.unwrap_or_else(|| run.join("landscape")), force, bandwidth),
        Command::Serve { port, host, out } => crate::service::serve(&host, port, out),
    }
}
