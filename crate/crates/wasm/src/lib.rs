//! Browser bindings: a simulation you can step, nudge and inspect from JS.

use echo_pathways::landscape::{curve, nod_samples, uniform_grid, BANDWIDTH, GRID_POINTS};
use echo_pathways::session::opinion_histogram;
use echo_pathways::{InterventionKind, RunOptions, ScenarioConfig, Simulation};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
pub struct IndexView {
    pub step: u32,
    pub rho: f64,
    pub i_h: f64,
    pub i_p: f64,
    pub i_s: f64,
    pub finished: bool,
}

#[derive(Serialize)]
pub struct LandscapeView {
    pub samples: usize,
    pub x: Vec<f64>,
    pub potential: Vec<f64>,
    pub minima: Vec<f64>,
}

#[wasm_bindgen]
pub struct DemoSimulation {
    sim: Simulation,
}

impl DemoSimulation {
    pub fn try_new(config_json: &str) -> Result<Self, String> {
        let config: ScenarioConfig = serde_json::from_str(config_json).map_err(|e| e.to_string())?;
        let sim = Simulation::new(config, RunOptions::default()).map_err(|e| e.to_string())?;
        Ok(DemoSimulation { sim })
    }

    /// Advance up to `n` steps; stops early once the run has finished.
    pub fn try_step(&mut self, n: u32) -> Result<u32, String> {
        for _ in 0..n {
            if self.sim.is_finished() {
                break;
            }
            self.sim.advance().map_err(|e| e.to_string())?;
        }
        Ok(self.sim.step())
    }

    /// Takes effect before the next step.
    pub fn try_intervene(&mut self, json: &str) -> Result<(), String> {
        let kind: InterventionKind = serde_json::from_str(json).map_err(|e| e.to_string())?;
        self.sim.apply_intervention(kind).map(|_| ()).map_err(|e| e.to_string())
    }

    pub fn index_view(&self) -> IndexView {
        let ix = self.sim.indices();
        IndexView {
            step: self.sim.step(),
            rho: ix.rho,
            i_h: ix.i_h,
            i_p: ix.i_p,
            i_s: ix.i_s,
            finished: self.sim.is_finished(),
        }
    }

    /// Potential from all opinion changes so far; `None` before the first step.
    pub fn landscape_view(&self) -> Result<Option<LandscapeView>, String> {
        let record = self.sim.record();
        let samples = nod_samples(&record, self.sim.initial_config().alpha).map_err(|e| e.to_string())?;
        if samples.is_empty() {
            return Ok(None);
        }
        let c = curve(&samples, &uniform_grid(GRID_POINTS), BANDWIDTH, 0.0, f64::INFINITY).map_err(|e| e.to_string())?;
        let minima = c.minima().into_iter().map(|k| c.grid[k]).collect();
        Ok(Some(LandscapeView {
            samples: c.n_samples,
            x: c.grid,
            potential: c.potential,
            minima,
        }))
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
impl DemoSimulation {
    #[wasm_bindgen(constructor)]
    pub fn new(config_json: &str) -> Result<DemoSimulation, JsError> {
        Self::try_new(config_json).map_err(js)
    }

    pub fn step(&mut self, n: u32) -> Result<u32, JsError> {
        self.try_step(n).map_err(js)
    }

    /// JSON intervention, e.g. `{"kind": "set_strategy", "strategy": "opinion"}`.
    pub fn intervene(&mut self, json: &str) -> Result<(), JsError> {
        self.try_intervene(json).map_err(js)
    }

    /// JSON with `step`, `rho`, `i_h`, `i_p`, `i_s` and `finished`.
    pub fn indices(&self) -> String {
        serde_json::to_string(&self.index_view()).expect("plain struct")
    }

    pub fn opinions(&self) -> Vec<f64> {
        self.sim.opinions().to_vec()
    }

    pub fn histogram(&self, bins: usize) -> Vec<u32> {
        opinion_histogram(self.sim.opinions(), bins.max(1))
    }

    /// JSON landscape, or `null` before the first step.
    pub fn landscape(&self) -> Result<String, JsError> {
        let view = self.landscape_view().map_err(js)?;
        Ok(serde_json::to_string(&view).expect("plain struct"))
    }
}
