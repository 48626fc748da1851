//! JSON run files and `--set key=value` overrides.

use anyhow::{anyhow, bail, Context, Result};
use pce_core::applications::ocp::OcpParameters;
use pce_core::applications::vdv::VanDeVusseParameters;
use pce_core::MeasureSpec;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::path::Path;

pub fn beta_mixture_spec() -> MeasureSpec {
    MeasureSpec::Mixture {
        weights: vec![0.3, 0.7],
        components: vec![
            MeasureSpec::Beta01 { alpha: 2.0, beta: 4.5 },
            MeasureSpec::Beta01 { alpha: 4.0, beta: 1.5 },
        ],
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub measure: MeasureSpec,
    pub degree: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec { measure: beta_mixture_spec(), degree: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Gauss,
    Radau,
    Lobatto,
    Fejer1,
    Fejer2,
    #[serde(alias = "clenshaw_curtis")]
    Cc,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSpec {
    pub measure: MeasureSpec,
    pub rule: RuleName,
    pub n: usize,
    /// Fixed node of a Radau rule; the lower end of the support if absent.
    pub endpoint: Option<f64>,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { measure: MeasureSpec::Uniform01, rule: RuleName::Gauss, n: 5, endpoint: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensorSpec {
    pub measures: Vec<MeasureSpec>,
    pub degree: usize,
    pub order: usize,
}

impl Default for TensorSpec {
    fn default() -> Self {
        TensorSpec { measures: vec![MeasureSpec::Gaussian], degree: 4, order: 3 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateSpec {
    pub parameters: VanDeVusseParameters,
    /// Monte Carlo realizations for the validation table; 0 skips it.
    pub mc_samples: usize,
    pub checkpoints: usize,
    /// Realizations written out in full at the checkpoints.
    pub paths: usize,
}

impl Default for PropagateSpec {
    fn default() -> Self {
        PropagateSpec { parameters: VanDeVusseParameters::default(), mc_samples: 10_000, checkpoints: 10, paths: 20 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpSpec {
    pub parameters: OcpParameters,
    pub k_measure: MeasureSpec,
    /// Realizations used for the violation rate; 0 skips it.
    pub mc_samples: usize,
}

impl Default for OcpSpec {
    fn default() -> Self {
        OcpSpec { parameters: OcpParameters::default(), k_measure: beta_mixture_spec(), mc_samples: 100_000 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub reps: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec { reps: 10_000 }
    }
}

/// Parses the override value as JSON, falling back to a plain string.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `a.b.c=value` at the dotted path, creating objects on the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` has an empty segment");
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| anyhow!("cannot descend into `{part}` of `{key}`"))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node.as_object_mut().ok_or_else(|| anyhow!("cannot set `{key}`: parent is not an object"))?;
    obj.insert(parts[parts.len() - 1].to_string(), override_value(raw));
    Ok(())
}

/// Reads the `--spec` file (or `{}`), applies overrides and decodes it.
/// Decoding errors name the offending field path.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> Result<T> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading spec {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing spec {}", p.display()))?
        }
        None => Value::Object(Map::new()),
    };
    if !value.is_object() {
        bail!("spec must be a JSON object");
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_path_to_error::deserialize(value).map_err(|e| anyhow!("invalid spec field `{}`: {}", e.path(), e.inner()))
}
