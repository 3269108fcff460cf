use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::record::RecordLevel;
use crate::sim::{run_with, RunOptions};

use super::grid::Job;

/// Written last into a job directory; its presence marks the job complete.
pub const DONE_MARKER: &str = "DONE";
pub const JOB_FILE: &str = "job.json";

#[derive(Clone, Copy, Debug)]
pub struct ExecuteOptions {
    pub parallelism: usize,
    pub level: RecordLevel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Progress {
    Skipped { job: String },
    Finished { job: String, done: usize, total: usize },
    Failed { job: String, reason: String },
}

#[derive(Debug, Default)]
pub struct ExecuteReport {
    pub executed: usize,
    pub skipped: usize,
    pub failed: Vec<(String, String)>,
}

pub fn is_complete(dir: &Path) -> bool {
    dir.join(DONE_MARKER).is_file()
}

fn run_job(job: &Job, dir: &Path, level: RecordLevel) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let job_path = dir.join(JOB_FILE);
    fs::write(&job_path, serde_json::to_string_pretty(job)? + "\n").map_err(|e| Error::io(&job_path, e))?;
    let options = RunOptions {
        capture_snapshots: level == RecordLevel::Full,
    };
    let record = run_with(&job.config, options, &[])?;
    record.save(dir, level)?;
    let marker = dir.join(DONE_MARKER);
    fs::write(&marker, format!("{}\n", job.seed)).map_err(|e| Error::io(&marker, e))
}

/// Run every incomplete job under `root/<cell>/<trial>/`. Jobs whose
/// directory already holds the marker are skipped; failures are collected
/// and do not stop the sweep.
pub fn execute(
    jobs: &[Job],
    root: &Path,
    options: ExecuteOptions,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<ExecuteReport> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut pending: Vec<(&Job, PathBuf)> = Vec::new();
    let mut report = ExecuteReport::default();
    for job in jobs {
        let dir = root.join(job.relative_dir());
        if is_complete(&dir) {
            report.skipped += 1;
            progress(Progress::Skipped { job: job.identity() });
        } else {
            pending.push((job, dir));
        }
    }

    let total = pending.len();
    let done = AtomicUsize::new(0);
    let failed = Mutex::new(Vec::new());
    let work = |(job, dir): &(&Job, PathBuf)| match run_job(job, dir, options.level) {
        Ok(()) => {
            let done = done.fetch_add(1, Ordering::Relaxed) + 1;
            progress(Progress::Finished { job: job.identity(), done, total });
        }
        Err(e) => {
            let reason = e.to_string();
            progress(Progress::Failed { job: job.identity(), reason: reason.clone() });
            failed.lock().unwrap().push((job.identity(), reason));
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| pending.par_iter().for_each(work));
    }
    #[cfg(not(feature = "parallel"))]
    pending.iter().for_each(work);

    report.executed = done.into_inner();
    let mut failed = failed.into_inner().unwrap();
    failed.sort();
    report.failed = failed;
    Ok(report)
}
