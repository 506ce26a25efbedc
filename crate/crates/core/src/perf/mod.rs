//! Instruction-level BOPs estimation from exported hardware counters.
//!
//! Raw event names are platform specific, so exports are read through a
//! mapping file that binds raw names to the logical counters the estimator
//! uses. Estimates are approximate by construction and are labeled as such.

mod counters;
mod estimate;

pub use counters::{
    parse_counter_export, CounterDump, EventMapping, ParsedExport, COUNTER_SCHEMA_VERSION,
};
pub use estimate::{
    deviation, estimate_bops, Estimate, EstimatorProfile, PROFILE_SCHEMA_VERSION, REQUIRED_COUNTERS,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerfError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: logical counter `{name}` appears more than once")]
    DuplicateCounter { line: usize, name: String },
    #[error("line {line}: counter `{name}` has negative value {value}")]
    NegativeValue {
        line: usize,
        name: String,
        value: String,
    },
    #[error("missing required counters: {}", .0.join(", "))]
    MissingCounters(Vec<String>),
    #[error("unsupported schema_version {0}")]
    Version(u32),
    #[error("invalid estimator profile: {0}")]
    Profile(String),
    #[error("deviation is undefined for a zero source-level count")]
    ZeroReference,
    #[error("estimate exceeds the 64-bit range")]
    Overflow,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, PerfError> {
    std::fs::read_to_string(path).map_err(|source| PerfError::Io {
        path: path.to_path_buf(),
        source,
    })
}
