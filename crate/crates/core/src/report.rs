//! Efficiency report: one machine, one or more measurements, and the derived
//! rows (real rate, efficiency, attained peak, attained efficiency, ceiling
//! efficiency) for each.
//!
//! The structured form keeps every derived value at full precision and is
//! checked on load: rows recomputed from the raw fields must match bit for
//! bit. The text form rounds percentages half-up to whole percent.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{MachineError, MachineSpec};
use crate::measurement::{Measurement, TallySource};
use crate::metrics::{self, bops_rate, efficiency, peak_bops, round_half_up_percent, MetricError};
use crate::roofline::{self, attained_peak, attained_with_ceilings, Binding, RooflineError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("a report needs at least one measurement")]
    NoMeasurements,
    #[error("measurement `{0}` has no tally; merge it with a counting run first")]
    NoTally(String),
    #[error("measurement `{0}` has no bytes_accessed, so attained rows cannot be computed")]
    MissingOi(String),
    #[error("invalid report options: {0}")]
    Options(String),
    #[error("unsupported report schema_version {0}")]
    Version(u32),
    #[error("derived row for `{0}` does not match its recomputation")]
    Inconsistent(String),
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Roofline(#[from] RooflineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOptions {
    /// Compute ceiling for the ceiling-efficiency row. Defaults to the ILP
    /// ceiling `peak * ilp_efficiency`.
    pub ceiling_rate: Option<f64>,
    /// Bandwidth ceiling for the ceiling-efficiency row. Defaults to the
    /// machine's peak bandwidth.
    pub ceiling_bandwidth: Option<f64>,
    /// Fail instead of printing n/a when a measurement lacks byte counts.
    pub require_attained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    pub workload: String,
    pub peak_bops: f64,
    pub real_bops: f64,
    pub efficiency: f64,
    pub operation_intensity: Option<f64>,
    pub attained_peak: Option<f64>,
    pub binding: Option<BindingName>,
    pub attained_efficiency: Option<f64>,
    pub ceiling_rate: f64,
    pub ceiling_bandwidth: f64,
    pub attained_ceiling: Option<f64>,
    pub ceiling_efficiency: Option<f64>,
    /// Real rate exceeds the attained peak.
    pub above_roof: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingName {
    MemoryBound,
    ComputeBound,
    Ridge,
}

impl From<Binding> for BindingName {
    fn from(b: Binding) -> Self {
        match b {
            Binding::MemoryBound => BindingName::MemoryBound,
            Binding::ComputeBound => BindingName::ComputeBound,
            Binding::Ridge => BindingName::Ridge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub machine: MachineSpec,
    pub options: ReportOptions,
    pub measurements: Vec<Measurement>,
    pub rows: Vec<ReportRow>,
}

fn derive_row(
    spec: &MachineSpec,
    m: &Measurement,
    opts: &ReportOptions,
) -> Result<ReportRow, ReportError> {
    if m.tally_source == TallySource::Absent {
        return Err(ReportError::NoTally(m.workload.clone()));
    }
    let peak = peak_bops(spec);
    let real = bops_rate(m)?;
    let eff = efficiency(real, peak)?.ratio();
    let ceiling_rate = opts
        .ceiling_rate
        .unwrap_or_else(|| roofline::ilp_ceiling(spec));
    let ceiling_bandwidth = opts
        .ceiling_bandwidth
        .unwrap_or(spec.mem_bandwidth_peak_bytes_per_s);

    let oi = match metrics::operation_intensity(m) {
        Ok(oi) => Some(oi),
        Err(MetricError::OiUndefined) if !opts.require_attained => None,
        Err(MetricError::OiUndefined) => return Err(ReportError::MissingOi(m.workload.clone())),
        Err(e) => return Err(e.into()),
    };
    let mut row = ReportRow {
        workload: m.workload.clone(),
        peak_bops: peak,
        real_bops: real,
        efficiency: eff,
        operation_intensity: oi,
        attained_peak: None,
        binding: None,
        attained_efficiency: None,
        ceiling_rate,
        ceiling_bandwidth,
        attained_ceiling: None,
        ceiling_efficiency: None,
        above_roof: None,
    };
    if let Some(oi) = oi {
        let a = attained_peak(spec, oi)?;
        row.attained_peak = Some(a.rate);
        row.binding = Some(a.binding.into());
        row.attained_efficiency = Some(roofline::attained_efficiency(real, a.rate)?.ratio());
        let ac = attained_with_ceilings(ceiling_rate, ceiling_bandwidth, oi);
        row.attained_ceiling = Some(ac);
        row.ceiling_efficiency = Some(roofline::ceiling_efficiency(real, ac)?.ratio());
        row.above_roof = Some(real > a.rate);
    }
    Ok(row)
}

impl ReportBundle {
    pub fn build(
        machine: MachineSpec,
        measurements: Vec<Measurement>,
        options: ReportOptions,
    ) -> Result<Self, ReportError> {
        machine.validate()?;
        if measurements.is_empty() {
            return Err(ReportError::NoMeasurements);
        }
        for (name, v) in [
            ("ceiling_rate", options.ceiling_rate),
            ("ceiling_bandwidth", options.ceiling_bandwidth),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ReportError::Options(format!("{name} must be > 0, got {v}")));
                }
            }
        }
        let rows = measurements
            .iter()
            .map(|m| derive_row(&machine, m, &options))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ReportBundle {
            schema_version: REPORT_SCHEMA_VERSION,
            machine,
            options,
            measurements,
            rows,
        })
    }

    /// Recompute every row from the raw fields and compare exactly.
    pub fn verify(&self) -> Result<(), ReportError> {
        if self.rows.len() != self.measurements.len() {
            return Err(ReportError::Inconsistent("<row count>".into()));
        }
        for (m, row) in self.measurements.iter().zip(&self.rows) {
            let again = derive_row(&self.machine, m, &self.options)?;
            if !rows_identical(&again, row) {
                return Err(ReportError::Inconsistent(m.workload.clone()));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json_str(text: &str) -> Result<Self, ReportError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(n) if n == u64::from(REPORT_SCHEMA_VERSION) => {}
            Some(n) => return Err(ReportError::Version(u32::try_from(n).unwrap_or(u32::MAX))),
            None => return Err(ReportError::Version(0)),
        }
        let b: ReportBundle = serde_json::from_value(v)?;
        b.machine.validate()?;
        b.verify()?;
        Ok(b)
    }

    /// A table with one column per workload.
    pub fn render_text(&self) -> String {
        let na = || "n/a".to_string();
        let pct = |r: f64| format!("{}%", round_half_up_percent(r));
        let mut lines: Vec<(String, Vec<String>)> = vec![
            (
                "".into(),
                self.rows.iter().map(|r| r.workload.clone()).collect(),
            ),
            (
                "Peak BOPS".into(),
                self.rows.iter().map(|r| sig_si(r.peak_bops, 3)).collect(),
            ),
            (
                "Real BOPS".into(),
                self.rows.iter().map(|r| sig_si(r.real_bops, 2)).collect(),
            ),
            (
                "BOPS Efficiency".into(),
                self.rows.iter().map(|r| pct(r.efficiency)).collect(),
            ),
            (
                "Attained Peak BOPS".into(),
                self.rows
                    .iter()
                    .map(|r| r.attained_peak.map_or_else(na, |v| sig_si(v, 3)))
                    .collect(),
            ),
            (
                "BOPS Attained Efficiency".into(),
                self.rows
                    .iter()
                    .map(|r| r.attained_efficiency.map_or_else(na, pct))
                    .collect(),
            ),
            (
                "Ceiling Efficiency".into(),
                self.rows
                    .iter()
                    .map(|r| r.ceiling_efficiency.map_or_else(na, pct))
                    .collect(),
            ),
        ];
        let flagged: Vec<&str> = self
            .rows
            .iter()
            .filter(|r| r.above_roof == Some(true))
            .map(|r| r.workload.as_str())
            .collect();
        if self
            .measurements
            .iter()
            .any(|m| m.tally_source == TallySource::Copied)
        {
            lines.push((
                "Tally".into(),
                self.measurements
                    .iter()
                    .map(|m| m.tally_source.to_string())
                    .collect(),
            ));
        }

        let w0 = lines.iter().map(|(h, _)| h.len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.rows.len())
            .map(|c| lines.iter().map(|(_, v)| v[c].len()).max().unwrap_or(0))
            .collect();
        let mut s = format!("machine: {}\n", self.machine.name);
        for (h, vals) in &lines {
            let _ = write!(s, "{h:<w0$}");
            for (v, w) in vals.iter().zip(&widths) {
                let _ = write!(s, "  {v:>w$}");
            }
            s.push('\n');
        }
        for f in flagged {
            let _ = writeln!(
                s,
                "warning: `{f}` is above the roof; check the machine file and measurement"
            );
        }
        s
    }
}

fn bits(v: Option<f64>) -> Option<u64> {
    v.map(f64::to_bits)
}

fn rows_identical(a: &ReportRow, b: &ReportRow) -> bool {
    a.workload == b.workload
        && a.peak_bops.to_bits() == b.peak_bops.to_bits()
        && a.real_bops.to_bits() == b.real_bops.to_bits()
        && a.efficiency.to_bits() == b.efficiency.to_bits()
        && bits(a.operation_intensity) == bits(b.operation_intensity)
        && bits(a.attained_peak) == bits(b.attained_peak)
        && a.binding == b.binding
        && bits(a.attained_efficiency) == bits(b.attained_efficiency)
        && a.ceiling_rate.to_bits() == b.ceiling_rate.to_bits()
        && a.ceiling_bandwidth.to_bits() == b.ceiling_bandwidth.to_bits()
        && bits(a.attained_ceiling) == bits(b.attained_ceiling)
        && bits(a.ceiling_efficiency) == bits(b.ceiling_efficiency)
        && a.above_roof == b.above_roof
}

/// `v` with an SI prefix, rounded to `digits` significant figures:
/// `sig_si(28.29e9, 2) == "28G"`, `sig_si(86.4e9, 3) == "86.4G"`.
pub fn sig_si(v: f64, digits: u32) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let (scaled, prefix) = [(1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "K")]
        .into_iter()
        .find(|(s, _)| v.abs() >= *s)
        .map_or((v, ""), |(s, p)| (v / s, p));
    let magnitude = scaled.abs().log10().floor() as i32 + 1;
    let decimals = (digits as i32 - magnitude).max(0) as usize;
    let mut text = format!("{scaled:.decimals$}");
    if text.contains('.') {
        text = text.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    format!("{text}{prefix}")
}
