use std::time::Instant;

use echo_pathways::{RunOptions, ScenarioConfig, Simulation, Strategy};

fn main() {
    for strategy in [Strategy::Random, Strategy::Structure, Strategy::Opinion] {
        let cfg = ScenarioConfig { k_h: 2, ..ScenarioConfig::new(0.45, 0.05, 0.05, 0.1, strategy) };
        let mut sim = Simulation::new(cfg, RunOptions::lean()).unwrap();
        let start = Instant::now();
        let mut steps = 0;
        while steps < 1000 && !sim.is_finished() {
            sim.advance().unwrap();
            steps += 1;
        }
        let rate = steps as f64 / start.elapsed().as_secs_f64();
        println!("{strategy}: {steps} steps, {rate:.0} steps/s");
    }
}
