//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Pass substrings as arguments to run a subset.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{call, wait_finished};
use echo_pathways::landscape::{curve, default_time_bins, landscape_over_time, trapezoid, uniform_grid, ForceSample, GRID_POINTS};
use echo_pathways::metrics::{
    baseline_rho, closed_triads, js_divergence, pathway_index, polarization_indices, reference_distributions, summarize,
    trajectory_index, DistanceHistogram, RunSummary,
};
use echo_pathways::rng::SimRng;
use echo_pathways::sweep::{aggregate, execute, expand_grid, preset, ExecuteOptions};
use echo_pathways::{
    run_with, BaselineFormula, Event, FollowGraph, InterventionEvent, RecordLevel, RunOptions, RunRecord, ScenarioConfig,
    Simulation, Strategy,
};
use echo_pathways_cli::service::{router, AppState};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn trials(config: &ScenarioConfig, count: u64) -> Vec<RunSummary> {
    (0..count)
        .into_par_iter()
        .map(|seed| {
            let rec = run_with(&config.clone().with_seed(seed), RunOptions::lean(), &[]).expect("run");
            summarize(&rec).expect("summary")
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Most frequent value, smallest on ties, with the full tally.
fn mode(values: impl Iterator<Item = usize>) -> (usize, BTreeMap<usize, usize>) {
    let mut tally = BTreeMap::new();
    for v in values {
        *tally.entry(v).or_insert(0) += 1;
    }
    let best = tally.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&k, _)| k).unwrap_or(0);
    (best, tally)
}

fn pathway_divergence() -> Outcome {
    let base = |alpha| ScenarioConfig::new(0.45, alpha, 0.025, 0.0, Strategy::Random);
    let pbs = median(trials(&base(0.05), 20).iter().map(|s| s.i_w).collect());
    let sbp = median(trials(&base(0.005), 20).iter().map(|s| s.i_w).collect());
    Outcome::new(pbs < 0.6 && sbp >= 0.6, format!("median I_w {pbs:.3} at alpha=0.05, {sbp:.3} at alpha=0.005"))
}

fn epsilon_sweep_mode() -> Outcome {
    let at = |eps| trials(&ScenarioConfig::new(eps, 0.05, 0.05, 0.1, Strategy::Random), 20);
    let mid = at(0.45);
    let (peaks, peak_tally) = mode(mid.iter().map(|s| s.opinion_peaks));
    let (comms, comm_tally) = mode(mid.iter().map(|s| s.communities));
    let (wide, wide_tally) = mode(at(1.0).iter().map(|s| s.opinion_peaks));
    Outcome::new(
        peaks == 2 && comms == 2 && wide == 1,
        format!("eps=0.45 peaks {peak_tally:?} communities {comm_tally:?}; eps=1.0 peaks {wide_tally:?}"),
    )
}

fn zignani_ratio() -> Outcome {
    let mean_triads = |strategy| {
        let s = trials(&ScenarioConfig::new(0.45, 0.05, 0.05, 0.1, strategy), 20);
        s.iter().map(|s| s.closed_triads as f64).sum::<f64>() / s.len() as f64
    };
    let structure = mean_triads(Strategy::Structure);
    let random = mean_triads(Strategy::Random);
    let ratio = structure / random;
    Outcome::new(
        ratio >= 1.3,
        format!("closed triads {structure:.0} structure vs {random:.0} random, ratio {ratio:.2}"),
    )
}

fn iw_bimodality() -> Outcome {
    let tmp = TempDir::new().unwrap();
    let config = preset("paper-mini").unwrap();
    let jobs = expand_grid(&config).unwrap();
    let parallelism = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = execute(
        &jobs,
        tmp.path(),
        ExecuteOptions {
            parallelism,
            level: config.record_level.into(),
        },
        &|_| {},
    )
    .unwrap();
    if !report.failed.is_empty() {
        return Outcome::new(false, format!("{} of {} jobs failed", report.failed.len(), jobs.len()));
    }
    let agg = aggregate(&[tmp.path().to_path_buf()]).unwrap();
    let Some(kde) = agg.kde_iw else {
        return Outcome::new(false, "no I_w values");
    };
    let modes = kde.modes();
    let valleys = kde.valleys();
    let valley = valleys.iter().any(|v| (0.5..=0.7).contains(v));
    Outcome::new(
        modes.len() >= 2 && valley,
        format!("{} runs, modes {modes:.3?}, valleys {valleys:.3?}", jobs.len()),
    )
}

fn brute_force_triads(n: usize, adj: &[Vec<bool>]) -> u64 {
    let mut count = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && b != c && a != c && adj[a][b] && adj[b][c] && adj[a][c] {
                    count += 1;
                }
            }
        }
    }
    count
}

fn metric_suite() -> Outcome {
    let mut rng = SimRng::seed_from_u64(2024);
    let mut failures = Vec::new();

    let mut steps = 0;
    for round in 0..10u64 {
        let strategy = [Strategy::Random, Strategy::Structure, Strategy::Opinion][round as usize % 3];
        let config = ScenarioConfig {
            n: 60,
            k_o: 6.0,
            k_h: rng.random_range(0..4),
            max_steps: 100,
            quiet_steps: 1_000,
            ..ScenarioConfig::new(
                rng.random_range(0.1..1.0),
                rng.random_range(0.01..0.5),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                strategy,
            )
        }
        .with_seed(round);
        let mut sim = Simulation::new(config, RunOptions::lean()).unwrap();
        let degrees: Vec<usize> = (0..60).map(|i| sim.graph().out_degree(i)).collect();
        while !sim.is_finished() {
            sim.advance().unwrap();
            steps += 1;
            if sim.opinions().iter().any(|x| !(-1.0..=1.0).contains(x)) {
                failures.push(format!("opinion out of range at round {round}"));
            }
            if (0..60).any(|i| sim.graph().out_degree(i) != degrees[i]) {
                failures.push(format!("out-degree changed at round {round}"));
            }
        }
    }
    if steps < 1_000 {
        failures.push(format!("only {steps} steps"));
    }

    let refs = reference_distributions(40).unwrap();
    for _ in 0..1_000 {
        let raw = |rng: &mut SimRng| {
            let v: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = v.iter().sum();
            DistanceHistogram::from_mass(v.iter().map(|x| x / total).collect())
        };
        let (a, b) = (raw(&mut rng), raw(&mut rng));
        let ab = js_divergence(&a, &b).unwrap();
        let ba = js_divergence(&b, &a).unwrap();
        if !(0.0..=std::f64::consts::LN_2).contains(&ab) || (ab - ba).abs() > 1e-12 || js_divergence(&a, &a).unwrap() != 0.0 {
            failures.push(format!("JS bounds or symmetry: {ab} vs {ba}"));
            break;
        }
    }
    let (ip, _) = polarization_indices(&refs.clustered_objective, &refs.clustered_subjective, &refs).unwrap();
    let (ip0, _) = polarization_indices(&refs.random, &refs.random, &refs).unwrap();
    if (ip - 1.0).abs() > 1e-12 || ip0.abs() > 1e-12 {
        failures.push(format!("I_p clustered {ip}, random {ip0}"));
    }

    let diagonal: Vec<(f64, f64)> = (0..=10).map(|k| (k as f64 / 10.0, k as f64 / 10.0)).collect();
    let trivial = [
        pathway_index(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]),
        pathway_index(&[(0.0, 0.0), (0.3, 0.0), (1.0, 0.0)]),
        pathway_index(&diagonal),
    ];
    if (trivial[0] - 1.0).abs() > 1e-12 || trivial[1].abs() > 1e-12 || (trivial[2] - 0.5).abs() > 1e-12 {
        failures.push(format!("pathway index trivial values {trivial:?}"));
    }

    for _ in 0..200 {
        let len = rng.random_range(2..50);
        let mut series = vec![rng.random_range(0.0..1.0)];
        for _ in 1..len {
            let next = series.last().unwrap() + rng.random_range(1e-6..0.1);
            series.push(next);
        }
        match trajectory_index(&series, len - 1) {
            Some(v) if (v - 1.0).abs() < 1e-9 => {}
            other => {
                failures.push(format!("trajectory index of monotone series {other:?}"));
                break;
            }
        }
    }

    for _ in 0..1_000 {
        let n = rng.random_range(1..=5usize);
        let mut adj = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(0.5) {
                    adj[i][j] = true;
                    edges.push((i as u32, j as u32));
                }
            }
        }
        let g = FollowGraph::from_edges(n, edges).unwrap();
        if closed_triads(&g) != brute_force_triads(n, &adj) {
            failures.push("closed triad count differs from brute force".into());
            break;
        }
    }

    let est = baseline_rho(0.45, BaselineFormula::MonteCarlo, &mut rng);
    if est.std_error >= 1e-3 {
        failures.push(format!("baseline standard error {}", est.std_error));
    }

    let detail = if failures.is_empty() {
        format!("{steps} randomized steps, 1000 triad graphs, baseline SE {:.1e}", est.std_error)
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

fn samples(force: impl Fn(f64) -> f64, count: usize, t_n: f64) -> Vec<ForceSample> {
    (0..count)
        .map(|k| {
            let x = -1.0 + 2.0 * (k as f64 + 0.5) / count as f64;
            ForceSample { x, force: force(x), t_n }
        })
        .collect()
}

fn landscape_suite() -> Outcome {
    let mut rng = SimRng::seed_from_u64(7);
    let grid = uniform_grid(GRID_POINTS);
    let mut worst_rms = 0.0f64;
    let mut worst_mean = 0.0f64;
    for _ in 0..50 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let force = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let raw = |x: f64| -(c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0);
        let shift = -(c[1] / 6.0 + c[3] / 20.0);
        let pc = curve(&samples(force, 10_000, 0.5), &grid, 0.1, 0.0, 1.0).unwrap();
        worst_mean = worst_mean.max(trapezoid(&pc.grid, &pc.potential).abs());
        let interior: Vec<f64> = pc
            .grid
            .iter()
            .zip(&pc.potential)
            .filter(|(x, _)| x.abs() <= 0.8)
            .map(|(&x, &v)| (v - (raw(x) - shift)).powi(2))
            .collect();
        worst_rms = worst_rms.max((interior.iter().sum::<f64>() / interior.len() as f64).sqrt());
    }

    let bins = default_time_bins();
    let mut well = Vec::new();
    for &(lo, _) in &bins {
        well.extend(samples(|x| -4.0 * x * (x * x - 0.25), 4_000, lo + 0.05));
    }
    let curves = landscape_over_time(&well, &bins, &grid, 0.1).unwrap();
    let minima: Vec<usize> = curves.iter().map(|c| c.as_ref().map_or(0, |c| c.minima().len())).collect();
    let two_wells = minima.len() == bins.len() && minima.iter().all(|&m| m == 2);
    Outcome::new(
        worst_rms < 1e-2 && worst_mean < 1e-9 && two_wells,
        format!("worst cubic RMS {worst_rms:.2e}, worst mean {worst_mean:.1e}, minima per bin {minima:?}"),
    )
}

fn random_intervention(rng: &mut SimRng) -> Value {
    if rng.random_bool(0.4) {
        let strategy = ["random", "structure", "opinion"][rng.random_range(0..3)];
        json!({"kind": "set_strategy", "strategy": strategy, "k_h": rng.random_range(0..=8)})
    } else {
        let param = ["p", "q", "alpha"][rng.random_range(0..3)];
        json!({"kind": "set_param", "param": param, "value": rng.random_range(0.0..0.3)})
    }
}

fn record_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

async fn replay_one(log: u64, app: &axum::Router, out: &Path, scratch: &Path) -> Result<usize, String> {
    let mut rng = SimRng::seed_from_u64(1_000 + log);
    let strategy = ["random", "structure", "opinion"][rng.random_range(0..3)];
    let alpha = [0.05, 0.1, 0.2][rng.random_range(0..3)];
    let config = json!({
        "n": rng.random_range(100..250), "k_o": 10, "epsilon": rng.random_range(0.3..0.6),
        "alpha": alpha, "q": rng.random_range(0.0..0.1),
        "p": rng.random_range(0.0..0.2), "strategy": strategy, "k_h": rng.random_range(0..3), "max_steps": 600,
    });
    let seed = rng.random::<u32>() as u64;
    let (status, created) = call(app, "POST", "/session", Some(json!({"config": config, "seed": seed}))).await;
    if status != 201 {
        return Err(format!("create returned {status}: {created}"));
    }
    let id = created["id"].as_str().unwrap().to_string();
    let control = format!("/session/{id}/control");
    let intervene = format!("/session/{id}/intervene");

    for op in 0..30 {
        let roll: f64 = rng.random();
        if roll < 0.5 {
            call(app, "POST", &control, Some(json!({"action": "step", "n": rng.random_range(1..15)}))).await;
        } else if roll < 0.85 {
            let mut body = random_intervention(&mut rng);
            body["idempotency_key"] = json!(format!("op{op}"));
            call(app, "POST", &intervene, Some(body.clone())).await;
            if rng.random_bool(0.3) {
                call(app, "POST", &intervene, Some(body)).await;
            }
        } else {
            call(app, "POST", &control, Some(json!({"action": "resume"}))).await;
            tokio::time::sleep(Duration::from_millis(rng.random_range(0..3))).await;
            call(app, "POST", &intervene, Some(random_intervention(&mut rng))).await;
            call(app, "POST", &control, Some(json!({"action": "pause"}))).await;
        }
    }
    call(app, "POST", &control, Some(json!({"action": "resume"}))).await;
    wait_finished(app, &id).await;

    // Persistence happens on the session thread right after the last step.
    let served = out.join(&id);
    let deadline = Instant::now() + Duration::from_secs(10);
    while !served.join("summary.json").is_file() {
        if Instant::now() > deadline {
            return Err(format!("session {id} was not persisted"));
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    let online = RunRecord::load(&served).map_err(|e| e.to_string())?;
    let schedule: Vec<InterventionEvent> = online
        .events
        .iter()
        .filter_map(|e| match e {
            Event::Intervention(i) => Some(*i),
            _ => None,
        })
        .collect();
    let mut initial: ScenarioConfig = serde_json::from_value(config).unwrap();
    initial.seed = seed;
    let offline = run_with(&initial, RunOptions::default(), &schedule).map_err(|e| e.to_string())?;
    let replayed = scratch.join(&id);
    offline.save(&replayed, RecordLevel::Full).map_err(|e| e.to_string())?;
    if offline != online {
        return Err(format!("log {log}: records differ"));
    }
    let (a, b) = (record_files(&served), record_files(&replayed));
    if a.keys().ne(b.keys()) {
        return Err(format!("log {log}: file sets differ {:?} vs {:?}", a.keys(), b.keys()));
    }
    for (name, bytes) in &a {
        if bytes != &b[name] {
            return Err(format!("log {log}: {name} differs"));
        }
    }
    Ok(schedule.len())
}

fn replay_equality() -> Outcome {
    let out = TempDir::new().unwrap();
    let scratch = TempDir::new().unwrap();
    let app = router(AppState::new(Some(out.path().to_path_buf())));
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let mut events = Vec::new();
    for log in 0..10 {
        match runtime.block_on(replay_one(log, &app, out.path(), scratch.path())) {
            Ok(n) => events.push(n),
            Err(e) => return Outcome::new(false, e),
        }
    }
    Outcome::new(true, format!("10 sessions byte-equal to offline replay; interventions per log {events:?}"))
}

fn performance() -> Outcome {
    let mut rates = Vec::new();
    for strategy in [Strategy::Random, Strategy::Structure, Strategy::Opinion] {
        let config = ScenarioConfig {
            n: 500,
            k_o: 15.0,
            k_r: 10,
            k_h: 2,
            max_steps: 1_000,
            quiet_steps: 10_000,
            ..ScenarioConfig::new(0.45, 0.05, 0.05, 0.1, strategy)
        };
        let mut sim = Simulation::new(config, RunOptions::default()).unwrap();
        let start = Instant::now();
        let mut steps = 0;
        while !sim.is_finished() {
            sim.advance().unwrap();
            steps += 1;
        }
        rates.push((strategy, steps as f64 / start.elapsed().as_secs_f64()));
    }
    let slowest = rates.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let detail: Vec<String> = rates.iter().map(|(s, r)| format!("{s} {r:.0}")).collect();
    Outcome::new(slowest >= 200.0, format!("steps/s at n=500 on one thread: {}", detail.join(", ")))
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("pathway divergence", pathway_divergence),
        ("epsilon sweep mode", epsilon_sweep_mode),
        ("closed triad ratio", zignani_ratio),
        ("I_w bimodality", iw_bimodality),
        ("metric properties", metric_suite),
        ("landscape oracles", landscape_suite),
        ("replay equality", replay_equality),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
