//! `--override key=value` handling. Keys address fields of the serialized
//! config, with dots for nesting (`fixed.n=300`); unknown keys are rejected.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn parse_pair(raw: &str) -> CliResult<(&str, Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Usage(format!("override `{raw}` has an empty key")));
    }
    let value = value.trim();
    let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key, parsed))
}

pub fn apply<T: Serialize + DeserializeOwned>(base: &T, overrides: &[String]) -> CliResult<T> {
    if overrides.is_empty() {
        return serde_json::to_value(base)
            .and_then(serde_json::from_value)
            .map_err(|e| CliError::Runtime(e.to_string()));
    }
    let mut doc = serde_json::to_value(base).map_err(|e| CliError::Runtime(e.to_string()))?;
    for raw in overrides {
        let (key, value) = parse_pair(raw)?;
        let mut slot = &mut doc;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|o| o.get_mut(part))
                .ok_or_else(|| CliError::Usage(format!("unknown override key `{key}`")))?;
        }
        *slot = value;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid override: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use echo_pathways::{ScenarioConfig, Strategy};

    #[test]
    fn numeric_and_string_values() {
        let base = ScenarioConfig::new(0.45, 0.05, 0.025, 0.0, Strategy::Random);
        let out = apply(&base, &["alpha=0.005".into(), "strategy=structure".into(), "n = 40".into()]).unwrap();
        assert_eq!(out.alpha, 0.005);
        assert_eq!(out.strategy, Strategy::Structure);
        assert_eq!(out.n, 40);
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let base = ScenarioConfig::new(0.45, 0.05, 0.025, 0.0, Strategy::Random);
        let err = apply(&base, &["beta=1".into()]).unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("beta")));
        assert!(apply(&base, &["alpha".into()]).is_err());
        assert!(apply(&base, &["alpha=\"x\"".into()]).is_err());
    }

    #[test]
    fn nested_keys() {
        let base = echo_pathways::sweep::preset("paper-mini").unwrap();
        let out = apply(&base, &["fixed.n=50".into(), "trials=2".into(), "axes.p=[0.0]".into()]).unwrap();
        assert_eq!(out.fixed.n, 50);
        assert_eq!(out.trials, 2);
        assert_eq!(out.axes.p, vec![0.0]);
        assert!(apply(&base, &["fixed.nope=1".into()]).is_err());
    }
}
