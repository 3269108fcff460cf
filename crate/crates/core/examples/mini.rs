use std::path::PathBuf;

use echo_pathways::sweep::{aggregate, execute, expand_grid, preset, ExecuteOptions};

fn main() {
    let name = std::env::args().nth(1).unwrap_or("paper-mini".into());
    let root = PathBuf::from(std::env::args().nth(2).unwrap_or("/tmp/mini".into()));
    let cfg = preset(&name).unwrap();
    let jobs = expand_grid(&cfg).unwrap();
    let t0 = std::time::Instant::now();
    let report = execute(&jobs, &root, ExecuteOptions { parallelism: 1, level: cfg.record_level.into() }, &|_| {}).unwrap();
    println!("executed {} skipped {} failed {} in {:.0}s", report.executed, report.skipped, report.failed.len(), t0.elapsed().as_secs_f64());
    let agg = aggregate(&[root.clone()]).unwrap();
    let k = agg.kde_iw.as_ref().unwrap();
    println!("modes {:?} valleys {:?} h {}", k.modes(), k.valleys(), k.bandwidth);
    agg.write(&root.join("_aggregate")).unwrap();
}
