//! Scenario parameterization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Recommendation strategy tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Structure,
    Opinion,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Structure => "structure",
            Strategy::Opinion => "opinion",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "structure" => Ok(Strategy::Structure),
            "opinion" => Ok(Strategy::Opinion),
            other => Err(Error::config(
                "strategy",
                format!("unknown strategy {other:?} (expected random, structure or opinion)"),
            )),
        }
    }
}

/// How the random-graph homophily baseline is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineFormula {
    /// Closed form `eps - eps^2 / 8`.
    #[default]
    Paper,
    /// Empirical `P(|u - v| < eps)` from 10^6 uniform pairs on `[-1, 1]`.
    MonteCarlo,
}

/// Full parameterization of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Mean out-degree of the initial Erdős–Rényi digraph.
    #[serde(default = "default_k_o")]
    pub k_o: f64,
    /// Confidence boundary.
    pub epsilon: f64,
    /// Influence parameter.
    pub alpha: f64,
    /// Rewiring probability.
    pub q: f64,
    /// Repost probability.
    pub p: f64,
    /// Recommendation slate size.
    #[serde(default = "default_k_r")]
    pub k_r: usize,
    /// Recommender memory window in steps.
    #[serde(default)]
    pub k_h: usize,
    pub strategy: Strategy,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
    #[serde(default = "default_quiet_steps")]
    pub quiet_steps: u32,
    #[serde(default = "default_opinion_tol")]
    pub opinion_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub baseline_formula: BaselineFormula,
}

fn default_schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_n() -> usize {
    500
}
fn default_k_o() -> f64 {
    15.0
}
fn default_k_r() -> usize {
    10
}
fn default_max_steps() -> u32 {
    20_000
}
fn default_quiet_steps() -> u32 {
    60
}
fn default_opinion_tol() -> f64 {
    1e-7
}

impl ScenarioConfig {
    /// Model defaults with the given dynamics parameters.
    pub fn new(epsilon: f64, alpha: f64, q: f64, p: f64, strategy: Strategy) -> Self {
        ScenarioConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            n: default_n(),
            k_o: default_k_o(),
            epsilon,
            alpha,
            q,
            p,
            k_r: default_k_r(),
            k_h: 0,
            strategy,
            max_steps: default_max_steps(),
            quiet_steps: default_quiet_steps(),
            opinion_tol: default_opinion_tol(),
            seed: 0,
            baseline_formula: BaselineFormula::Paper,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if self.n < 2 {
            return Err(Error::config("n", "need at least 2 agents"));
        }
        if !(self.k_o > 0.0 && self.k_o <= (self.n - 1) as f64) {
            return Err(Error::config("k_o", format!("must lie in (0, n-1], got {}", self.k_o)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 2.0) {
            return Err(Error::config("epsilon", format!("must lie in (0, 2], got {}", self.epsilon)));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("q", self.q)?;
        check_unit("p", self.p)?;
        if self.k_r < 1 {
            return Err(Error::config("k_r", "slate size must be at least 1"));
        }
        if self.quiet_steps < 1 {
            return Err(Error::config("quiet_steps", "must be at least 1"));
        }
        if !(self.opinion_tol >= 0.0 && self.opinion_tol.is_finite()) {
            return Err(Error::config("opinion_tol", "must be a finite non-negative number"));
        }
        Ok(())
    }

    /// Parse and validate a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(json_to_config_error)?;
        config.validate()?;
        Ok(config)
    }
}

pub(crate) fn check_unit(key: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in [0, 1], got {value}")))
    }
}

/// Serde reports missing/unknown fields in prose; pull the field name out so
/// the error names the key.
fn json_to_config_error(err: serde_json::Error) -> Error {
    let text = err.to_string();
    let key = text
        .split('`')
        .nth(1)
        .map(str::to_owned)
        .unwrap_or_else(|| "config".to_owned());
    Error::config(key, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_epsilon_names_the_key() {
        let err = ScenarioConfig::from_json(r#"{"alpha":0.05,"q":0.025,"p":0,"strategy":"random"}"#)
            .unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "epsilon"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(
            r#"{"epsilon":0.45,"alpha":0.05,"q":0.025,"p":0,"strategy":"random"}"#,
        )
        .unwrap();
        assert_eq!(c.n, 500);
        assert_eq!(c.k_o, 15.0);
        assert_eq!(c.k_r, 10);
        assert_eq!(c.max_steps, 20_000);
        assert_eq!(c.quiet_steps, 60);
        assert_eq!(c.opinion_tol, 1e-7);
        assert_eq!(c.baseline_formula, BaselineFormula::Paper);
    }

    #[test]
    fn range_checks() {
        let base = ScenarioConfig::new(0.45, 0.05, 0.025, 0.0, Strategy::Random);
        let mut c = base.clone();
        c.alpha = 1.5;
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "alpha"));
        let mut c = base.clone();
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.quiet_steps = 0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.k_o = 600.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_json(
            r#"{"epsilon":0.45,"alpha":0.05,"q":0.025,"p":0,"strategy":"random","beta":1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config { key, .. } if key == "beta"));
    }
}
