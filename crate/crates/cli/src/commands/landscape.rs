use std::fmt::Write;
use std::path::Path;

use echo_pathways::landscape::{
    default_time_bins, fod_samples, landscape_over_time, nod_samples, uniform_grid, PotentialCurve, GRID_POINTS,
};
use echo_pathways::RunRecord;

use super::{create_dir, write_output};
use crate::cli::ForceArg;
use crate::error::{CliError, CliResult};
use crate::plot::{line_chart, ramp, Series};

fn bound(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "inf".into()
    }
}

pub fn landscape_csv(curves: &[PotentialCurve]) -> String {
    let mut out = String::from("time_bin_lo,time_bin_hi,x,F_smooth,V,n_samples\n");
    for c in curves {
        for k in 0..c.grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                bound(c.t_lo),
                bound(c.t_hi),
                c.grid[k],
                c.force[k],
                c.potential[k],
                c.n_samples
            );
        }
    }
    out
}

pub fn wells_csv(curves: &[PotentialCurve]) -> String {
    let mut out = String::from("time_bin_lo,time_bin_hi,n_samples,sparse,minima,minima_x,well_depth\n");
    for c in curves {
        let minima = c.minima();
        let xs: Vec<String> = minima.iter().map(|&k| format!("{:.4}", c.grid[k])).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            bound(c.t_lo),
            bound(c.t_hi),
            c.n_samples,
            c.sparse,
            minima.len(),
            xs.join(" "),
            c.well_depth()
        );
    }
    out
}

pub fn execute(run: &Path, out: &Path, force: ForceArg, bandwidth: f64) -> CliResult<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(CliError::Usage(format!("invalid value for `bandwidth`: must be positive, got {bandwidth}")));
    }
    if !run.is_dir() {
        return Err(CliError::Usage(format!("{} is not a run directory", run.display())));
    }
    let record = RunRecord::load(run)?;
    if record.snapshots.is_none() {
        return Err(CliError::Usage(format!(
            "{} has no opinion snapshots; landscapes need a full-level record",
            run.display()
        )));
    }
    let samples = match force {
        ForceArg::Nod => nod_samples(&record, record.config.alpha)?,
        ForceArg::Fod => fod_samples(&record),
    };
    create_dir(out)?;
    let bins = default_time_bins();
    let curves: Vec<PotentialCurve> = if samples.is_empty() {
        eprintln!("warning: {} has no force samples; no curves written", run.display());
        Vec::new()
    } else {
        landscape_over_time(&samples, &bins, &uniform_grid(GRID_POINTS), bandwidth)?
            .into_iter()
            .flatten()
            .collect()
    };
    let sparse = curves.iter().filter(|c| c.sparse).count();
    if sparse > 0 {
        eprintln!("warning: {sparse} time bin(s) have fewer than 50 samples and are flagged sparse");
    }
    write_output(&out.join("landscape.csv"), &landscape_csv(&curves))?;
    write_output(&out.join("wells.csv"), &wells_csv(&curves))?;

    let series: Vec<Series> = curves
        .iter()
        .map(|c| Series {
            label: format!("t_n {:.1}-{}{}", c.t_lo, bound(c.t_hi), if c.sparse { " (sparse)" } else { "" }),
            points: c.grid.iter().copied().zip(c.potential.iter().copied()).collect(),
            color: ramp(c.t_lo),
        })
        .collect();
    let kind = match force {
        ForceArg::Nod => "NOD",
        ForceArg::Fod => "FOD",
    };
    write_output(
        &out.join("landscape.svg"),
        &line_chart(&format!("Potential V(x) from {kind} by normalized time"), "x", "V", &series),
    )?;
    println!("{} curve(s), {} sample(s); out={}", curves.len(), samples.len(), out.display());
    Ok(())
}
