//! Experiment configuration: schema-validated, every field defaulted, and
//! the fully resolved form echoed into every report for reproducibility.

use crate::adversary::StrategyKind;
use crate::covering::FamilyConstants;
use crate::engine::{ChannelMode, WakeMode};
use crate::graph::GraphSpec;
use crate::protocols::ProtocolConstants;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Bb1Known,
    Bb1Unknown,
    Bbt,
    BbtUnknown,
    Expander,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyFlavorChoice {
    Hash,
    Sampled,
    ExpanderUndirected,
    ExpanderDirected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub flavor: FamilyFlavorChoice,
    pub seed: u64,
    /// Family path-length parameter; defaults to the protocol's L. A
    /// smaller value densifies sampled subgraphs while keeping the family
    /// adequate at the protocol's budget on well-connected fixtures.
    pub l: Option<u32>,
    /// Fault parameter for the sampled flavor; defaults to `2 t`.
    pub k: Option<u32>,
    pub constants: FamilyConstants,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            flavor: FamilyFlavorChoice::Hash,
            seed: 0,
            l: None,
            k: None,
            constants: FamilyConstants::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BbtPlanChoice {
    Sampled,
    Expander,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Broadcast payload bit.
    pub m0: bool,
    pub source: u32,
    pub source_active: bool,
    pub t: u32,
    /// Known-diameter protocols: the estimate D'; `None` means the exact
    /// diameter of the generated fixture.
    pub d_estimate: Option<u64>,
    /// Explicit path budget for `bbt`; `None` means `(6t+2) * D`.
    pub l: Option<u32>,
    /// Conductance estimate handed to every node in expander mode.
    pub phi_estimate: Option<f64>,
    /// Family plan for the general-t doubling wrapper.
    pub plan: BbtPlanChoice,
    pub family: FamilyConfig,
    pub constants: ProtocolConstants,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            kind: ProtocolKind::Bb1Known,
            m0: true,
            source: 0,
            source_active: true,
            t: 1,
            d_estimate: None,
            l: None,
            phi_estimate: None,
            plan: BbtPlanChoice::Expander,
            family: FamilyConfig::default(),
            constants: ProtocolConstants::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdversaryConfig {
    pub kind: StrategyKind,
    /// Forged indices for `forge_flood` (`None` = family-aware choice).
    pub indices: Option<Vec<u32>>,
    /// Scripted schedule file (transcript JSON lines), when kind needs one.
    pub schedule_path: Option<String>,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            kind: StrategyKind::Silent,
            indices: None,
            schedule_path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultMode {
    Explicit,
    Random,
    WorstOf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultConfig {
    pub mode: FaultMode,
    pub edges: Vec<u32>,
    /// Fault-set size for random/worst-of modes; `None` means `t`.
    pub count: Option<u32>,
    /// Candidate sets sampled in worst-of mode.
    pub k: u32,
}

impl Default for FaultConfig {
    fn default() -> Self {
        FaultConfig {
            mode: FaultMode::Explicit,
            edges: Vec::new(),
            count: None,
            k: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineKnobs {
    pub beta: u32,
    pub mode: ChannelMode,
    pub wake: WakeMode,
    pub record_transcript: bool,
    pub instrument: bool,
}

impl Default for EngineKnobs {
    fn default() -> Self {
        EngineKnobs {
            beta: 8,
            mode: ChannelMode::Congest,
            wake: WakeMode::Simultaneous,
            record_transcript: false,
            instrument: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    #[default]
    Strict,
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub mode: VerifyMode,
    /// Cover parameters; `None` means `7 * diameter` and `k = 1`.
    pub l: Option<u32>,
    pub k: Option<u32>,
    pub budget: u64,
    pub seeds: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            mode: VerifyMode::Strict,
            l: None,
            k: None,
            budget: 2_000_000,
            seeds: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub graph: GraphSpec,
    pub protocol: ProtocolConfig,
    pub adversary: AdversaryConfig,
    pub faults: FaultConfig,
    pub trials: u32,
    pub master_seed: u64,
    pub engine: EngineKnobs,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: 1,
            graph: GraphSpec::new(crate::graph::GraphKind::Cycle { n: 8 }, 0),
            protocol: ProtocolConfig::default(),
            adversary: AdversaryConfig::default(),
            faults: FaultConfig::default(),
            trials: 1,
            master_seed: 0,
            engine: EngineKnobs::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies a `key.path=value` override onto the JSON form. Values parse
    /// as JSON when possible, strings otherwise.
    pub fn apply_override(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        self.apply_overrides(&[(key.to_string(), raw.to_string())])
    }

    /// Applies several overrides atomically: all paths are patched into the
    /// JSON form before re-validation, so interdependent fields (such as a
    /// generator kind and its parameters) can change together.
    pub fn apply_overrides(&mut self, pairs: &[(String, String)]) -> Result<(), ConfigError> {
        let mut doc = serde_json::to_value(&*self).expect("config serializes");
        for (key, raw) in pairs {
            let value: serde_json::Value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            let mut at = &mut doc;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                if i + 1 == parts.len() {
                    match at {
                        serde_json::Value::Object(map) => {
                            map.insert(part.to_string(), value);
                            break;
                        }
                        _ => {
                            return Err(ConfigError::Field {
                                field: key.clone(),
                                msg: "path does not denote an object".into(),
                            })
                        }
                    }
                } else {
                    at = at
                        .as_object_mut()
                        .and_then(|m| m.get_mut(*part))
                        .ok_or_else(|| ConfigError::Field {
                            field: key.clone(),
                            msg: format!("unknown segment `{part}`"),
                        })?;
                }
            }
        }
        *self = serde_json::from_value(doc).map_err(|e| ConfigError::Field {
            field: pairs
                .iter()
                .map(|(k, _)| k.as_str())
                .collect::<Vec<_>>()
                .join(","),
            msg: e.to_string(),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_json(
            r#"{"graph": {"kind": "cycle", "n": 8}, "trials": 5}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.schema_version, 1);
    }

    #[test]
    fn overrides_apply_by_path() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_override("protocol.t", "2").unwrap();
        cfg.apply_override("adversary.kind", "\"bit_flip\"").unwrap();
        cfg.apply_override("graph.n", "16").unwrap();
        assert_eq!(cfg.protocol.t, 2);
        assert_eq!(cfg.adversary.kind, StrategyKind::BitFlip);
        assert!(cfg.apply_override("nope.deep.path", "1").is_err());
    }
}
