//! Scenario configuration: strict JSON with defaults for absent keys.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::diff::DiffScheme;
use crate::error::{GeomError, Result};
use crate::merton::MertonParams;
use crate::report::Format;

pub const SCENARIOS: [&str; 7] = ["merton", "gaussian", "s3", "cylinder", "cigar-line", "zones", "all"];

/// Grid axis names accepted by each scenario, in chart order.
pub fn axis_names(scenario: &str) -> &'static [&'static str] {
    match scenario {
        "merton" | "zones" => &["t", "x", "y"],
        "cylinder" => &["t", "theta", "phi"],
        "gaussian" | "s3" | "cigar-line" => &["x", "y", "z"],
        _ => &[],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: String,
    /// Per-axis resolutions by axis name, e.g. `{"t": 31}`.
    pub grid: BTreeMap<String, usize>,
    pub scheme: DiffScheme,
    /// Tolerance overrides by check id.
    pub tolerances: BTreeMap<String, f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Zone threshold on |∂₀σ|.
    pub threshold: f64,
    /// Seeds the negative-control perturbations only.
    pub seed: u64,
    pub threads: Option<usize>,
    pub merton: MertonParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: "all".into(),
            grid: BTreeMap::new(),
            scheme: DiffScheme::default(),
            tolerances: BTreeMap::new(),
            format: Format::Text,
            out: None,
            threshold: 1e-4,
            seed: 0,
            threads: None,
            merton: MertonParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GeomError::Config(m));
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return bad(format!("unknown scenario {:?}; expected one of {}", self.scenario, SCENARIOS.join(", ")));
        }
        self.scheme.validate()?;
        self.merton.validate()?;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return bad(format!("threshold {} must be positive", self.threshold));
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        for (id, t) in &self.tolerances {
            if !(*t > 0.0) || t.is_nan() {
                return bad(format!("tolerance for {id:?} must be positive, got {t}"));
            }
        }
        let names: Vec<&str> = match self.scenario.as_str() {
            "all" => SCENARIOS.iter().flat_map(|s| axis_names(s).iter().copied()).collect(),
            s => axis_names(s).to_vec(),
        };
        for (axis, &r) in &self.grid {
            if !names.contains(&axis.as_str()) {
                return bad(format!("grid axis {axis:?} not used by scenario {:?}", self.scenario));
            }
            if r < 2 {
                return bad(format!("grid resolution for {axis:?} must be at least 2, got {r}"));
            }
        }
        Ok(())
    }

    /// Resolutions for `scenario`, overriding `defaults` by axis name.
    pub fn resolution(&self, scenario: &str, defaults: &[usize]) -> Vec<usize> {
        axis_names(scenario)
            .iter()
            .zip(defaults)
            .map(|(name, &d)| self.grid.get(*name).copied().unwrap_or(d))
            .collect()
    }
}

/// Strict parse: unknown keys and malformed documents are errors with a position.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| GeomError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse_config("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn partial_grid_override() {
        let c = parse_config(r#"{"scenario":"merton","grid":{"t":31}}"#).unwrap();
        assert_eq!(c.scenario, "merton");
        assert_eq!(c.resolution("merton", &[61, 8, 8]), vec![31, 8, 8]);
    }

    #[test]
    fn scheme_keys() {
        let c = parse_config(r#"{"scheme":{"h":0.005,"use_exact_jets":false}}"#).unwrap();
        assert_eq!(c.scheme.step, 0.005);
        assert!(!c.scheme.use_exact_jets);
        assert_eq!(c.scheme.step3, DiffScheme::default().step3);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        match parse_config("{\n  \"scenario\": \"merton\",\n  \"gird\": {}\n}") {
            Err(GeomError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config(r#"{"scheme":{"step":0.1}}"#), Err(GeomError::Parse { .. })));
        assert!(matches!(parse_config("{\"scenario\": "), Err(GeomError::Parse { .. })));
    }

    #[test]
    fn nonpositive_values_rejected() {
        for doc in [
            r#"{"threshold":0}"#,
            r#"{"scheme":{"h":-1}}"#,
            r#"{"tolerances":{"x":0}}"#,
            r#"{"threads":0}"#,
            r#"{"scenario":"merton","grid":{"t":1}}"#,
            r#"{"scenario":"merton","grid":{"theta":5}}"#,
            r#"{"scenario":"bryant"}"#,
        ] {
            assert!(matches!(parse_config(doc), Err(GeomError::Config(_))), "{doc}");
        }
    }
}
