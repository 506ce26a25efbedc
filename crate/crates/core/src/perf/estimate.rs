//! `Integer_All = Integer_Ins + p_int * SSE_Integer`
//! `FP_All = FP_Ins + s_fp * SSE_Scalar + p_fp * SSE_Packed`
//! `BOPs ~ Integer_All + FP_All`
//!
//! The packed multipliers are the vector width over 64 bits: 2 for 128-bit
//! units, 4 for 256-bit units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::counters::CounterDump;
use super::{read_file, PerfError};

pub const PROFILE_SCHEMA_VERSION: u32 = 1;

pub const REQUIRED_COUNTERS: [&str; 5] = [
    "Integer_Ins",
    "SSE_Integer",
    "FP_Ins",
    "SSE_Scalar",
    "SSE_Packed",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorProfile {
    pub packed_integer_multiplier: f64,
    pub packed_fp_multiplier: f64,
    pub scalar_fp_multiplier: f64,
}

impl Default for EstimatorProfile {
    fn default() -> Self {
        EstimatorProfile {
            packed_integer_multiplier: 2.0,
            packed_fp_multiplier: 2.0,
            scalar_fp_multiplier: 1.0,
        }
    }
}

impl EstimatorProfile {
    /// Profile for SIMD units `width_bits` wide (a multiple of 64).
    pub fn for_vector_width(width_bits: u32) -> Result<Self, PerfError> {
        if width_bits == 0 || width_bits % 64 != 0 {
            return Err(PerfError::Profile(format!(
                "vector width {width_bits} is not a positive multiple of 64"
            )));
        }
        let m = f64::from(width_bits / 64);
        Ok(EstimatorProfile {
            packed_integer_multiplier: m,
            packed_fp_multiplier: m,
            scalar_fp_multiplier: 1.0,
        })
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        for (name, v) in [
            ("packed_integer_multiplier", self.packed_integer_multiplier),
            ("packed_fp_multiplier", self.packed_fp_multiplier),
            ("scalar_fp_multiplier", self.scalar_fp_multiplier),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PerfError::Profile(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// TOML with a leading `schema_version = 1`. Missing multipliers take
    /// their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, PerfError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| PerfError::Profile(e.to_string()))?;
        match table.remove("schema_version") {
            Some(toml::Value::Integer(v)) if v == i64::from(PROFILE_SCHEMA_VERSION) => {}
            Some(toml::Value::Integer(v)) => {
                return Err(PerfError::Version(u32::try_from(v).unwrap_or(u32::MAX)))
            }
            Some(_) => {
                return Err(PerfError::Profile(
                    "schema_version must be an integer".into(),
                ))
            }
            None => return Err(PerfError::Profile("missing schema_version".into())),
        }
        let d = EstimatorProfile::default();
        let mut p = d;
        for (k, v) in table {
            let x = match v {
                toml::Value::Float(f) => f,
                toml::Value::Integer(i) => i as f64,
                _ => return Err(PerfError::Profile(format!("{k} must be a number"))),
            };
            match k.as_str() {
                "packed_integer_multiplier" => p.packed_integer_multiplier = x,
                "packed_fp_multiplier" => p.packed_fp_multiplier = x,
                "scalar_fp_multiplier" => p.scalar_fp_multiplier = x,
                _ => return Err(PerfError::Profile(format!("unknown key `{k}`"))),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PerfError> {
        Self::from_toml_str(&read_file(path.as_ref())?)
    }

    pub fn to_toml_string(&self) -> String {
        format!(
            "schema_version = {PROFILE_SCHEMA_VERSION}\n\
             packed_integer_multiplier = {:?}\n\
             packed_fp_multiplier = {:?}\n\
             scalar_fp_multiplier = {:?}\n",
            self.packed_integer_multiplier, self.packed_fp_multiplier, self.scalar_fp_multiplier
        )
    }
}

/// An instruction-level estimate. Always approximate: instruction counts
/// only approximate the operation classes of a source-level tally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub bops: u64,
    pub integer_all: f64,
    pub fp_all: f64,
    pub approximate: bool,
}

fn integral(m: f64) -> Option<u128> {
    (m.fract() == 0.0 && m >= 0.0 && m <= u64::MAX as f64).then_some(m as u128)
}

/// `Σ count * multiplier`, exact when every multiplier is integral.
fn weighted(terms: &[(u64, f64)]) -> Result<(u128, f64), PerfError> {
    let approx: f64 = terms.iter().map(|&(c, m)| c as f64 * m).sum();
    if terms.iter().all(|&(_, m)| integral(m).is_some()) {
        let mut exact: u128 = 0;
        for &(c, m) in terms {
            let term = u128::from(c)
                .checked_mul(integral(m).expect("checked above"))
                .ok_or(PerfError::Overflow)?;
            exact = exact.checked_add(term).ok_or(PerfError::Overflow)?;
        }
        Ok((exact, approx))
    } else {
        Ok((approx.round() as u128, approx))
    }
}

pub fn estimate_bops(
    dump: &CounterDump,
    profile: &EstimatorProfile,
) -> Result<Estimate, PerfError> {
    profile.validate()?;
    let missing: Vec<String> = REQUIRED_COUNTERS
        .iter()
        .filter(|n| dump.get(n).is_none())
        .map(|n| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(PerfError::MissingCounters(missing));
    }
    let c = |n: &str| dump.get(n).expect("presence checked");
    let int_terms = [
        (c("Integer_Ins"), 1.0),
        (c("SSE_Integer"), profile.packed_integer_multiplier),
    ];
    let fp_terms = [
        (c("FP_Ins"), 1.0),
        (c("SSE_Scalar"), profile.scalar_fp_multiplier),
        (c("SSE_Packed"), profile.packed_fp_multiplier),
    ];
    let all: Vec<(u64, f64)> = int_terms.iter().chain(&fp_terms).copied().collect();
    let (total, _) = weighted(&all)?;
    let (_, integer_all) = weighted(&int_terms)?;
    let (_, fp_all) = weighted(&fp_terms)?;
    Ok(Estimate {
        bops: u64::try_from(total).map_err(|_| PerfError::Overflow)?,
        integer_all,
        fp_all,
        approximate: true,
    })
}

/// `|estimated - source_level| / source_level`.
pub fn deviation(estimated: u64, source_level: u64) -> Result<f64, PerfError> {
    if source_level == 0 {
        return Err(PerfError::ZeroReference);
    }
    Ok(estimated.abs_diff(source_level) as f64 / source_level as f64)
}
