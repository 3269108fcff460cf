use std::fmt::Write;
use std::path::{Path, PathBuf};

use echo_pathways::metrics::{pathway_index, summarize};
use echo_pathways::sweep::aggregate;
use echo_pathways::RunRecord;
use serde::Serialize;

use super::{create_dir, write_output};
use crate::error::{CliError, CliResult};
use crate::plot::{heatmap, line_chart, parse_matrix, Series};

pub fn is_run_dir(path: &Path) -> bool {
    path.join("config.json").is_file() && path.join("series.csv").is_file()
}

pub fn execute(inputs: &[PathBuf], out: &Path) -> CliResult<()> {
    for input in inputs {
        if !input.is_dir() {
            return Err(CliError::Usage(format!("{} is not a directory", input.display())));
        }
    }
    match inputs {
        [single] if is_run_dir(single) => run_outputs(single, out),
        _ if inputs.iter().any(|p| is_run_dir(p)) => Err(CliError::Usage(
            "analyze takes either one run directory or one or more sweep roots".into(),
        )),
        _ => sweep_outputs(inputs, out),
    }
}

pub fn run_outputs(dir: &Path, out: &Path) -> CliResult<()> {
    let record = RunRecord::load(dir)?;
    let summary = summarize(&record)?;
    create_dir(out)?;

    let mut phase = String::from("step,I_p,I_h\n");
    let mut series = String::from("step,rho,I_h,I_p,I_s,I_w_running\n");
    let mut trajectory: Vec<(f64, f64)> = Vec::with_capacity(record.index_series.len());
    let mut i_w = 0.0;
    for p in &record.index_series {
        if let Some(&last) = trajectory.last() {
            i_w += pathway_index(&[last, (p.i_p, p.i_h)]);
        }
        trajectory.push((p.i_p, p.i_h));
        let _ = writeln!(phase, "{},{},{}", p.step, p.i_p, p.i_h);
        let _ = writeln!(series, "{},{},{},{},{},{}", p.step, p.rho, p.i_h, p.i_p, p.i_s, i_w);
    }
    write_output(&out.join("phase_plane.csv"), &phase)?;
    write_output(&out.join("series.csv"), &series)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(&out.join("summary.json"), &(json + "\n"))?;

    let title = format!(
        "I_p vs I_h (I_w = {:.3}, {})",
        summary.i_w,
        summary.class.as_str()
    );
    let svg = line_chart(
        &title,
        "I_p",
        "I_h",
        &[Series {
            label: String::new(),
            points: trajectory,
            color: "#31688e".into(),
        }],
    );
    write_output(&out.join("phase_plane.svg"), &svg)?;

    let pick = |f: fn(&echo_pathways::IndexPoint) -> f64| -> Vec<(f64, f64)> {
        record.index_series.iter().map(|p| (p.step as f64, f(p))).collect()
    };
    let svg = line_chart(
        "Indices over time",
        "step",
        "value",
        &[
            Series { label: "I_h".into(), points: pick(|p| p.i_h), color: "#440154".into() },
            Series { label: "I_p".into(), points: pick(|p| p.i_p), color: "#31688e".into() },
            Series { label: "I_s".into(), points: pick(|p| p.i_s), color: "#35b779".into() },
        ],
    );
    write_output(&out.join("series.svg"), &svg)?;
    println!(
        "T={} I_w={:.4} class={} t_a={} peaks={} communities={} out={}",
        summary.stop_step,
        summary.i_w,
        summary.class.as_str(),
        summary.t_a,
        summary.opinion_peaks,
        summary.communities,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct KdeReport {
    trials: usize,
    bandwidth: f64,
    modes: Vec<f64>,
    valleys: Vec<f64>,
}

pub fn sweep_outputs(roots: &[PathBuf], out: &Path) -> CliResult<()> {
    let agg = aggregate(roots)?;
    let trials: usize = agg.cells.iter().map(|c| c.trials.len()).sum();
    if trials == 0 {
        let names: Vec<String> = roots.iter().map(|r| r.display().to_string()).collect();
        return Err(CliError::Usage(format!("no completed jobs under {}", names.join(", "))));
    }
    agg.write(out)?;
    for (name, body) in agg.matrices() {
        let Some((_, cols, rows, values)) = parse_matrix(&body) else {
            continue;
        };
        let stem = name.trim_end_matches(".csv");
        let svg = heatmap(stem, &rows, &cols, &values, "q", "alpha");
        write_output(&out.join(format!("{stem}.svg")), &svg)?;
    }
    if let Some(kde) = &agg.kde_iw {
        let report = KdeReport {
            trials,
            bandwidth: kde.bandwidth,
            modes: kde.modes(),
            valleys: kde.valleys(),
        };
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_output(&out.join("kde_iw.json"), &(json + "\n"))?;
        let svg = line_chart(
            &format!("KDE of I_w over {trials} runs"),
            "I_w",
            "density",
            &[Series {
                label: String::new(),
                points: kde.grid.iter().copied().zip(kde.density.iter().copied()).collect(),
                color: "#31688e".into(),
            }],
        );
        write_output(&out.join("kde_iw.svg"), &svg)?;
        println!(
            "{} cells, {trials} runs; I_w modes {:?} valleys {:?}; out={}",
            agg.cells.len(),
            report.modes,
            report.valleys,
            out.display()
        );
    } else {
        println!("{} cells, {trials} runs; out={}", agg.cells.len(), out.display());
    }
    Ok(())
}
