use echo_pathways::metrics::summarize;
use echo_pathways::{run_with, RunOptions, ScenarioConfig, Strategy};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let (alpha, q, p, eps, trials) = (args[0], args[1], args[2], args[3], args[4] as u64);
    let strategy: Strategy = std::env::var("STRAT").unwrap_or("random".into()).parse().unwrap();
    let n: usize = std::env::var("N").map(|v| v.parse().unwrap()).unwrap_or(500);
    for seed in 0..trials {
        let cfg = ScenarioConfig { n, ..ScenarioConfig::new(eps, alpha, q, p, strategy) }.with_seed(seed);
        let t0 = std::time::Instant::now();
        let rec = run_with(&cfg, RunOptions::lean(), &[]).unwrap();
        let s = summarize(&rec).unwrap();
        println!(
            "seed {seed}: T={} {:?} I_w={:.3} t_a={} Ip={:.3} Ih={:.3} Is={:.3} peaks={} comm={} triads={} rewires={} ({:.1}s)",
            s.stop_step, s.stop_reason, s.i_w, s.t_a, s.final_i_p, s.final_i_h, s.final_i_s, s.opinion_peaks, s.communities, s.closed_triads, s.rewire_count, t0.elapsed().as_secs_f64()
        );
    }
}
