use std::path::Path;

use echo_pathways::metrics::summarize;
use echo_pathways::{run_with, InterventionEvent, RecordLevel, RunOptions, ScenarioConfig};

use super::read_input;
use crate::error::{CliError, CliResult};
use crate::overrides;

pub fn load_config(path: &Path, seed: Option<u64>, extra: &[String]) -> CliResult<ScenarioConfig> {
    let text = read_input(path)?;
    let mut config = ScenarioConfig::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let config = overrides::apply(&config, extra)?;
    config.validate()?;
    Ok(config)
}

pub fn load_schedule(path: &Path) -> CliResult<Vec<InterventionEvent>> {
    let events: Vec<InterventionEvent> = serde_json::from_str(&read_input(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    for e in &events {
        e.kind.validate()?;
    }
    if events.windows(2).any(|w| w[0].step > w[1].step) {
        return Err(CliError::Usage(format!("{}: interventions must be sorted by step", path.display())));
    }
    Ok(events)
}

pub fn execute(config: &Path, seed: Option<u64>, out: &Path, extra: &[String], schedule: Option<&Path>) -> CliResult<()> {
    let config = load_config(config, seed, extra)?;
    let schedule = schedule.map(load_schedule).transpose()?.unwrap_or_default();
    let record = run_with(&config, RunOptions::default(), &schedule)?;
    record.save(out, RecordLevel::Full)?;
    let s = summarize(&record)?;
    println!(
        "T={} stop_reason={} I_w={:.4} class={} t_a={} out={}",
        s.stop_step,
        s.stop_reason.as_str(),
        s.i_w,
        s.class.as_str(),
        s.t_a,
        out.display()
    );
    Ok(())
}
