//! One workload run: tally, wall time and logical bytes moved.
//!
//! Two on-disk encodings carry the same record, both versioned:
//!
//! Flat key-value text (`#` starts a comment, keys in any order after the
//! leading `schema_version`):
//!
//! ```text
//! schema_version=1
//! workload=sort
//! arithmetic=106000000000
//! comparing=36000000000
//! addressing=387000000000
//! wall_time_s=18.7
//! bytes_accessed=176333333333.33334
//! threads=6
//! tally_source=counted
//! ```
//!
//! JSON, with the same keys except that the three class counts nest under
//! `"tally"`. [`Measurement::parse`] accepts either, sniffing a leading `{`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tally::BopsTally;

pub const MEASUREMENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("invalid measurement: {0}")]
    Invalid(String),
    #[error("measurement line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported measurement schema_version {0} (expected {MEASUREMENT_SCHEMA_VERSION})")]
    Version(u32),
    #[error("measurement JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where a measurement's tally came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TallySource {
    /// Counted by the same run that produced the record.
    Counted,
    /// Copied from a separate counting run with an identical configuration.
    Copied,
    /// Timing-only run; the tally is empty.
    Absent,
}

impl fmt::Display for TallySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TallySource::Counted => "counted",
            TallySource::Copied => "copied",
            TallySource::Absent => "absent",
        })
    }
}

impl FromStr for TallySource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counted" => Ok(TallySource::Counted),
            "copied" => Ok(TallySource::Copied),
            "absent" => Ok(TallySource::Absent),
            other => Err(format!("unknown tally_source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    pub workload: String,
    pub tally: BopsTally,
    pub wall_time_s: f64,
    /// Logical bytes read and written. Zero means unknown.
    pub bytes_accessed: f64,
    pub threads: u32,
    pub tally_source: TallySource,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementJson {
    schema_version: u32,
    workload: String,
    tally: BopsTally,
    wall_time_s: f64,
    bytes_accessed: f64,
    threads: u32,
    tally_source: TallySource,
}

impl Measurement {
    pub fn new(
        workload: impl Into<String>,
        tally: BopsTally,
        wall_time_s: f64,
        bytes_accessed: f64,
        threads: u32,
    ) -> Result<Self, MeasurementError> {
        let m = Measurement {
            workload: workload.into(),
            tally,
            wall_time_s,
            bytes_accessed,
            threads,
            tally_source: TallySource::Counted,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MeasurementError> {
        if !(self.wall_time_s.is_finite() && self.wall_time_s > 0.0) {
            return Err(MeasurementError::Invalid(format!(
                "wall_time_s must be > 0, got {}",
                self.wall_time_s
            )));
        }
        if !(self.bytes_accessed.is_finite() && self.bytes_accessed >= 0.0) {
            return Err(MeasurementError::Invalid(format!(
                "bytes_accessed must be >= 0, got {}",
                self.bytes_accessed
            )));
        }
        if self.threads == 0 {
            return Err(MeasurementError::Invalid("threads must be >= 1".into()));
        }
        if self.workload.is_empty() || self.workload.contains(['\n', '\r']) {
            return Err(MeasurementError::Invalid(
                "workload name must be a non-empty single line".into(),
            ));
        }
        Ok(())
    }

    /// Take tally and byte counts from a counting run of the same configuration.
    pub fn with_counts_from(mut self, counting: &Measurement) -> Self {
        self.tally = counting.tally;
        self.bytes_accessed = counting.bytes_accessed;
        self.tally_source = TallySource::Copied;
        self
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "schema_version={MEASUREMENT_SCHEMA_VERSION}\n\
             workload={}\n\
             arithmetic={}\n\
             comparing={}\n\
             addressing={}\n\
             wall_time_s={:?}\n\
             bytes_accessed={:?}\n\
             threads={}\n\
             tally_source={}\n",
            self.workload,
            self.tally.arithmetic,
            self.tally.comparing,
            self.tally.addressing,
            self.wall_time_s,
            self.bytes_accessed,
            self.threads,
            self.tally_source,
        )
    }

    pub fn to_json_string(&self) -> String {
        let rec = MeasurementJson {
            schema_version: MEASUREMENT_SCHEMA_VERSION,
            workload: self.workload.clone(),
            tally: self.tally,
            wall_time_s: self.wall_time_s,
            bytes_accessed: self.bytes_accessed,
            threads: self.threads,
            tally_source: self.tally_source,
        };
        let mut s = serde_json::to_string_pretty(&rec).expect("measurement serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, MeasurementError> {
        // Peek at the version so a future schema reports a version error.
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MEASUREMENT_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(MeasurementError::Version(
                    u32::try_from(v).unwrap_or(u32::MAX),
                ))
            }
            None => {
                return Err(MeasurementError::Invalid(
                    "missing integer schema_version".into(),
                ))
            }
        }
        let rec: MeasurementJson = serde_json::from_value(value)?;
        let m = Measurement {
            workload: rec.workload,
            tally: rec.tally,
            wall_time_s: rec.wall_time_s,
            bytes_accessed: rec.bytes_accessed,
            threads: rec.threads,
            tally_source: rec.tally_source,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_kv_str(text: &str) -> Result<Self, MeasurementError> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut saw_version = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MeasurementError::Syntax {
                    line: line_no,
                    msg: format!("expected key=value, got {line:?}"),
                })?;
            let (key, value) = (key.trim(), value.trim());
            if !saw_version {
                if key != "schema_version" {
                    return Err(MeasurementError::Syntax {
                        line: line_no,
                        msg: "first field must be schema_version".into(),
                    });
                }
                let v: u32 = value.parse().map_err(|_| MeasurementError::Syntax {
                    line: line_no,
                    msg: format!("bad schema_version {value:?}"),
                })?;
                if v != MEASUREMENT_SCHEMA_VERSION {
                    return Err(MeasurementError::Version(v));
                }
                saw_version = true;
                continue;
            }
            if !KV_KEYS.contains(&key) {
                return Err(MeasurementError::Syntax {
                    line: line_no,
                    msg: format!("unknown key {key:?}"),
                });
            }
            if fields.insert(key, (line_no, value)).is_some() {
                return Err(MeasurementError::Syntax {
                    line: line_no,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        if !saw_version {
            return Err(MeasurementError::Invalid("missing schema_version".into()));
        }

        fn get<'a>(
            fields: &BTreeMap<&str, (usize, &'a str)>,
            key: &str,
        ) -> Result<(usize, &'a str), MeasurementError> {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| MeasurementError::Invalid(format!("missing key {key:?}")))
        }
        fn num<T: FromStr>(
            fields: &BTreeMap<&str, (usize, &str)>,
            key: &str,
        ) -> Result<T, MeasurementError> {
            let (line, v) = get(fields, key)?;
            v.parse().map_err(|_| MeasurementError::Syntax {
                line,
                msg: format!("bad value for {key}: {v:?}"),
            })
        }

        let (src_line, src) = get(&fields, "tally_source")?;
        let m = Measurement {
            workload: get(&fields, "workload")?.1.to_string(),
            tally: BopsTally::new(
                num(&fields, "arithmetic")?,
                num(&fields, "comparing")?,
                num(&fields, "addressing")?,
            ),
            wall_time_s: num(&fields, "wall_time_s")?,
            bytes_accessed: num(&fields, "bytes_accessed")?,
            threads: num(&fields, "threads")?,
            tally_source: src.parse().map_err(|msg| MeasurementError::Syntax {
                line: src_line,
                msg,
            })?,
        };
        m.validate()?;
        Ok(m)
    }

    /// Parse either encoding.
    pub fn parse(text: &str) -> Result<Self, MeasurementError> {
        if text.trim_start().starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_kv_str(text)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeasurementError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MeasurementError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

const KV_KEYS: [&str; 8] = [
    "workload",
    "arithmetic",
    "comparing",
    "addressing",
    "wall_time_s",
    "bytes_accessed",
    "threads",
    "tally_source",
];
