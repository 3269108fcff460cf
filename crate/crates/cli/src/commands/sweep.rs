use std::path::PathBuf;

use echo_pathways::sweep::{execute as run_jobs, expand_grid, preset, ExecuteOptions, Progress, SweepConfig};

use super::{create_dir, read_input, write_output};
use crate::error::{CliError, CliResult};
use crate::overrides;

pub const SWEEP_FILE: &str = "sweep.json";
pub const AGGREGATE_DIR: &str = "_aggregate";

pub struct SweepArgs {
    pub config: Option<PathBuf>,
    pub preset: Option<&'static str>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub parallelism: Option<usize>,
}

pub fn resolve(args: &SweepArgs) -> CliResult<SweepConfig> {
    let mut config = match (&args.config, args.preset) {
        (Some(path), _) => {
            SweepConfig::from_json(&read_input(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(CliError::Usage("either --config or --preset is required".into())),
    };
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    let config = overrides::apply(&config, &args.overrides)?;
    config.validate()?;
    Ok(config)
}

pub fn execute(args: SweepArgs) -> CliResult<()> {
    let config = resolve(&args)?;
    let jobs = expand_grid(&config)?;
    create_dir(&args.out)?;

    // A root holds exactly one grid.
    let header = args.out.join(SWEEP_FILE);
    let mut grid_only = config.clone();
    grid_only.parallelism = None;
    let body = serde_json::to_string_pretty(&grid_only).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    if header.exists() {
        let existing = read_input(&header)?;
        if existing != body {
            return Err(CliError::Usage(format!(
                "{} holds a different sweep; choose another --out",
                args.out.display()
            )));
        }
    } else {
        write_output(&header, &body)?;
    }

    let parallelism = args
        .parallelism
        .or(config.parallelism)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    eprintln!("{} jobs, {} worker(s), output in {}", jobs.len(), parallelism, args.out.display());
    let started = std::time::Instant::now();
    let report = run_jobs(
        &jobs,
        &args.out,
        ExecuteOptions {
            parallelism,
            level: config.record_level.into(),
        },
        &|p| match p {
            Progress::Finished { job, done, total } => eprintln!("[{done}/{total}] {job}"),
            Progress::Failed { job, reason } => eprintln!("failed: {job}: {reason}"),
            Progress::Skipped { .. } => {}
        },
    )?;
    eprintln!(
        "executed {} skipped {} failed {} in {:.1}s",
        report.executed,
        report.skipped,
        report.failed.len(),
        started.elapsed().as_secs_f64()
    );
    super::analyze::sweep_outputs(std::slice::from_ref(&args.out), &args.out.join(AGGREGATE_DIR))?;
    if !report.failed.is_empty() {
        return Err(CliError::Runtime(format!("{} job(s) failed", report.failed.len())));
    }
    Ok(())
}
