//! Micro-architecture description used for peak BOPS and roofline geometry.
//!
//! Machine files are TOML with a leading `schema_version = 1` and exactly the
//! keys below; anything else is rejected.
//!
//! ```toml
//! schema_version = 1
//! name = "Xeon E5645"
//! num_cpu = 1
//! num_core = 6
//! frequency_hz = 2.4e9
//! bops_per_cycle = 6
//! flops_per_cycle = 4          # optional
//! mem_bandwidth_peak_bytes_per_s = 13.8e9
//! ilp_efficiency = 0.5
//! simd_scale = 0.5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MACHINE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("invalid machine spec: {0}")]
    Invalid(String),
    #[error("machine spec parse error: {0}")]
    Parse(String),
    #[error("unsupported machine spec schema_version {found} (expected {MACHINE_SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub name: String,
    pub num_cpu: u32,
    /// Cores per CPU.
    pub num_core: u32,
    pub frequency_hz: f64,
    pub bops_per_cycle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flops_per_cycle: Option<f64>,
    pub mem_bandwidth_peak_bytes_per_s: f64,
    pub ilp_efficiency: f64,
    pub simd_scale: f64,
}

fn positive(name: &str, v: f64) -> Result<(), MachineError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MachineError::Invalid(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

fn unit_interval(name: &str, v: f64) -> Result<(), MachineError> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(MachineError::Invalid(format!(
            "{name} must lie in (0, 1], got {v}"
        )))
    }
}

impl MachineSpec {
    pub fn validate(&self) -> Result<(), MachineError> {
        if self.num_cpu == 0 {
            return Err(MachineError::Invalid("num_cpu must be >= 1".into()));
        }
        if self.num_core == 0 {
            return Err(MachineError::Invalid("num_core must be >= 1".into()));
        }
        positive("frequency_hz", self.frequency_hz)?;
        positive("bops_per_cycle", self.bops_per_cycle)?;
        if let Some(f) = self.flops_per_cycle {
            positive("flops_per_cycle", f)?;
        }
        positive(
            "mem_bandwidth_peak_bytes_per_s",
            self.mem_bandwidth_peak_bytes_per_s,
        )?;
        unit_interval("ilp_efficiency", self.ilp_efficiency)?;
        unit_interval("simd_scale", self.simd_scale)?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, MachineError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| MachineError::Parse(e.to_string()))?;
        // Version first, so files from another schema get a version error
        // rather than an unknown-key error.
        match table.remove("schema_version") {
            Some(toml::Value::Integer(v)) if v == i64::from(MACHINE_SCHEMA_VERSION) => {}
            Some(toml::Value::Integer(v)) => {
                return Err(MachineError::Version {
                    found: u32::try_from(v).unwrap_or(u32::MAX),
                })
            }
            Some(_) => {
                return Err(MachineError::Parse(
                    "schema_version must be an integer".into(),
                ))
            }
            None => return Err(MachineError::Parse("missing schema_version".into())),
        }
        let spec: MachineSpec = table
            .try_into()
            .map_err(|e: toml::de::Error| MachineError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MachineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MachineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = format!("schema_version = {MACHINE_SCHEMA_VERSION}\n");
        out.push_str(&toml::to_string(self).expect("machine spec serializes"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E5645: &str = r#"
schema_version = 1
name = "E5645"
num_cpu = 1
num_core = 6
frequency_hz = 2.4e9
bops_per_cycle = 6.0
flops_per_cycle = 4.0
mem_bandwidth_peak_bytes_per_s = 13.8e9
ilp_efficiency = 0.5
simd_scale = 0.5
"#;

    #[test]
    fn parses_valid_file() {
        let spec = MachineSpec::from_toml_str(E5645).unwrap();
        assert_eq!(spec.num_core, 6);
        assert_eq!(spec.flops_per_cycle, Some(4.0));
    }

    #[test]
    fn flops_per_cycle_is_optional() {
        let text = E5645.replace("flops_per_cycle = 4.0\n", "");
        let spec = MachineSpec::from_toml_str(&text).unwrap();
        assert_eq!(spec.flops_per_cycle, None);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{E5645}l3_cache_bytes = 12\n");
        let err = MachineSpec::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("l3_cache_bytes"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let text = E5645.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(
            MachineSpec::from_toml_str(&text),
            Err(MachineError::Version { found: 2 })
        ));
    }

    #[test]
    fn missing_version_rejected() {
        let text = E5645.replace("schema_version = 1", "");
        assert!(matches!(
            MachineSpec::from_toml_str(&text),
            Err(MachineError::Parse(_))
        ));
    }

    #[test]
    fn out_of_range_values_rejected() {
        for (from, to) in [
            ("ilp_efficiency = 0.5", "ilp_efficiency = 1.5"),
            ("simd_scale = 0.5", "simd_scale = 0.0"),
            ("num_core = 6", "num_core = 0"),
            ("frequency_hz = 2.4e9", "frequency_hz = -1.0"),
        ] {
            let text = E5645.replace(from, to);
            assert!(
                matches!(
                    MachineSpec::from_toml_str(&text),
                    Err(MachineError::Invalid(_))
                ),
                "{to}"
            );
        }
    }

    #[test]
    fn toml_round_trip() {
        let spec = MachineSpec::from_toml_str(E5645).unwrap();
        let again = MachineSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(spec, again);
    }
}
