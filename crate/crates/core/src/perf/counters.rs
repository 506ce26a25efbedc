//! Counter export and event mapping files.
//!
//! Export format, one record per line:
//!
//! ```text
//! #schema_version=1
//! #machine=E5645
//! #workload=sort
//! #duration_s=18.7
//! INST_RETIRED.ANY,1234567
//! FP_COMP_OPS_EXE.SSE_FP_PACKED,42
//! ```
//!
//! `#key=value` lines for `schema_version`, `machine`, `workload` and
//! `duration_s` are metadata; any other line starting with `#` is a comment.
//! Data lines are `raw_event_name,value` with a non-negative integer value.
//!
//! Mapping format: one `raw_event_name logical_name` pair per line, separated
//! by a comma or whitespace. Several raw events may map to the same logical
//! counter, but an export may supply each logical counter only once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::estimate::REQUIRED_COUNTERS;
use super::{read_file, PerfError};

pub const COUNTER_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CounterDump {
    pub counters: BTreeMap<String, u64>,
    pub machine: Option<String>,
    pub workload: Option<String>,
    pub duration_s: Option<f64>,
}

impl CounterDump {
    pub fn get(&self, name: &str) -> Option<u64> {
        self.counters.get(name).copied()
    }

    /// Serialize with logical names; re-read it with
    /// [`EventMapping::passthrough`].
    pub fn to_export_string(&self) -> String {
        let mut s = format!("#schema_version={COUNTER_SCHEMA_VERSION}\n");
        if let Some(m) = &self.machine {
            let _ = writeln!(s, "#machine={m}");
        }
        if let Some(w) = &self.workload {
            let _ = writeln!(s, "#workload={w}");
        }
        if let Some(d) = self.duration_s {
            let _ = writeln!(s, "#duration_s={d:?}");
        }
        for (k, v) in &self.counters {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventMapping {
    raw_to_logical: BTreeMap<String, String>,
    passthrough: bool,
}

impl EventMapping {
    /// Treat every raw name as already logical.
    pub fn passthrough() -> Self {
        EventMapping {
            raw_to_logical: BTreeMap::new(),
            passthrough: true,
        }
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        EventMapping {
            raw_to_logical: pairs
                .into_iter()
                .map(|(a, b)| (a.into(), b.into()))
                .collect(),
            passthrough: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self, PerfError> {
        let mut map = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let l = raw_line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let [raw, logical] = fields[..] else {
                return Err(PerfError::Malformed {
                    line,
                    msg: format!("expected `raw_event logical_name`, got {l:?}"),
                });
            };
            if map.insert(raw.to_string(), logical.to_string()).is_some() {
                return Err(PerfError::Malformed {
                    line,
                    msg: format!("raw event `{raw}` mapped twice"),
                });
            }
        }
        Ok(EventMapping {
            raw_to_logical: map,
            passthrough: false,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PerfError> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn logical<'a>(&'a self, raw: &'a str) -> Option<&'a str> {
        if self.passthrough {
            Some(raw)
        } else {
            self.raw_to_logical.get(raw).map(String::as_str)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedExport {
    pub dump: CounterDump,
    /// One message per raw event that the mapping does not cover.
    pub warnings: Vec<String>,
}

fn parse_metadata(
    dump: &mut CounterDump,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), PerfError> {
    let value = value.trim();
    match key.trim() {
        "schema_version" => {
            let v: u32 = value.parse().map_err(|_| PerfError::Malformed {
                line,
                msg: format!("bad schema_version {value:?}"),
            })?;
            if v != COUNTER_SCHEMA_VERSION {
                return Err(PerfError::Version(v));
            }
        }
        "machine" => dump.machine = Some(value.to_string()),
        "workload" => dump.workload = Some(value.to_string()),
        "duration_s" => {
            let d: f64 = value.parse().map_err(|_| PerfError::Malformed {
                line,
                msg: format!("bad duration_s {value:?}"),
            })?;
            if !(d.is_finite() && d > 0.0) {
                return Err(PerfError::Malformed {
                    line,
                    msg: format!("duration_s must be > 0, got {value}"),
                });
            }
            dump.duration_s = Some(d);
        }
        _ => {}
    }
    Ok(())
}

/// Parse a counter export through `mapping`. Fails when the export supplies
/// none of the required logical counters; a partial set is accepted here and
/// rejected by [`estimate_bops`](super::estimate_bops).
pub fn parse_counter_export(text: &str, mapping: &EventMapping) -> Result<ParsedExport, PerfError> {
    let mut dump = CounterDump::default();
    let mut warnings = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw_line.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(meta) = l.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                parse_metadata(&mut dump, line, k, v)?;
            }
            continue;
        }
        let Some((name, value)) = l.rsplit_once(',') else {
            return Err(PerfError::Malformed {
                line,
                msg: format!("expected `raw_event_name,value`, got {l:?}"),
            });
        };
        let (name, value) = (name.trim(), value.trim());
        if name.is_empty() {
            return Err(PerfError::Malformed {
                line,
                msg: "empty event name".into(),
            });
        }
        if value.starts_with('-') && value[1..].parse::<u64>().is_ok() {
            return Err(PerfError::NegativeValue {
                line,
                name: name.to_string(),
                value: value.to_string(),
            });
        }
        let count: u64 = value.parse().map_err(|_| PerfError::Malformed {
            line,
            msg: format!("value {value:?} is not a non-negative integer"),
        })?;
        match mapping.logical(name) {
            Some(logical) => {
                if dump.counters.insert(logical.to_string(), count).is_some() {
                    return Err(PerfError::DuplicateCounter {
                        line,
                        name: logical.to_string(),
                    });
                }
            }
            None => warnings.push(format!("line {line}: unmapped event `{name}` ignored")),
        }
    }
    if !REQUIRED_COUNTERS
        .iter()
        .any(|r| dump.counters.contains_key(*r))
    {
        return Err(PerfError::MissingCounters(
            REQUIRED_COUNTERS.iter().map(|s| s.to_string()).collect(),
        ));
    }
    Ok(ParsedExport { dump, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mapping() -> EventMapping {
        EventMapping::parse("INT_RET Integer_Ins\nFP_RET,FP_Ins\n# comment\n").unwrap()
    }

    #[test]
    fn two_line_file() {
        let p = parse_counter_export("INT_RET,7\nFP_RET,3\n", &mapping()).unwrap();
        assert_eq!(p.dump.get("Integer_Ins"), Some(7));
        assert_eq!(p.dump.get("FP_Ins"), Some(3));
        assert_eq!(p.dump.counters.len(), 2);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn empty_file_is_missing_counters() {
        let e = parse_counter_export("", &mapping()).unwrap_err();
        assert!(
            e.to_string().starts_with("missing required counters"),
            "{e}"
        );
    }

    #[test]
    fn unmapped_event_warns() {
        let p = parse_counter_export("INT_RET,7\nCYCLES,99\n", &mapping()).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].contains("CYCLES"));
        assert_eq!(p.dump.get("CYCLES"), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_counter_export("INT_RET,7\nFP_RET 3\n", &mapping()).unwrap_err() {
            PerfError::Malformed { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        match parse_counter_export("INT_RET,7\nFP_RET,-3\n", &mapping()).unwrap_err() {
            PerfError::NegativeValue { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        match parse_counter_export("INT_RET,7\n\nINT_RET,8\n", &mapping()).unwrap_err() {
            PerfError::DuplicateCounter { line, name } => {
                assert_eq!((line, name.as_str()), (3, "Integer_Ins"))
            }
            e => panic!("{e}"),
        }
        assert!(matches!(
            parse_counter_export("#schema_version=2\nINT_RET,1\n", &mapping()),
            Err(PerfError::Version(2))
        ));
    }

    #[test]
    fn two_raw_events_same_logical_is_duplicate() {
        let m = EventMapping::parse("A Integer_Ins\nB Integer_Ins\n").unwrap();
        assert!(matches!(
            parse_counter_export("A,1\nB,2\n", &m),
            Err(PerfError::DuplicateCounter { .. })
        ));
    }

    #[test]
    fn mapping_errors() {
        assert!(EventMapping::parse("only_one_field\n").is_err());
        assert!(EventMapping::parse("A x\nA y\n").is_err());
    }

    #[test]
    fn metadata_round_trip() {
        let mut dump = CounterDump {
            machine: Some("E5645".into()),
            workload: Some("sort".into()),
            duration_s: Some(18.7),
            ..Default::default()
        };
        dump.counters.insert("Integer_Ins".into(), 100);
        dump.counters.insert("SSE_Packed".into(), 3);
        let text = dump.to_export_string();
        let back = parse_counter_export(&text, &EventMapping::passthrough()).unwrap();
        assert_eq!(back.dump, dump);
    }
}
