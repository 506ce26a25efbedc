//! Scalar BOPS formulas: peak rate, achieved rate, efficiency and operation
//! intensity.

use thiserror::Error;

use crate::machine::MachineSpec;
use crate::measurement::Measurement;
use crate::tally::TallyOverflow;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("wall time must be > 0 (got {0})")]
    NonPositiveTime(f64),
    #[error("peak rate must be > 0 (got {0})")]
    NonPositivePeak(f64),
    #[error("operation intensity undefined: no bytes accessed")]
    OiUndefined,
    #[error(transparent)]
    Overflow(#[from] TallyOverflow),
}

/// Machine peak: CPUs x cores x frequency x BOPs per cycle.
pub fn peak_bops(spec: &MachineSpec) -> f64 {
    f64::from(spec.num_cpu) * f64::from(spec.num_core) * spec.frequency_hz * spec.bops_per_cycle
}

/// Peak FLOPS for the classic roofline comparison, if the machine declares it.
pub fn peak_flops(spec: &MachineSpec) -> Option<f64> {
    spec.flops_per_cycle
        .map(|f| f64::from(spec.num_cpu) * f64::from(spec.num_core) * spec.frequency_hz * f)
}

/// Achieved BOPS: total BOPs over wall time.
pub fn bops_rate(m: &Measurement) -> Result<f64, MetricError> {
    if m.wall_time_s.is_nan() || m.wall_time_s <= 0.0 {
        return Err(MetricError::NonPositiveTime(m.wall_time_s));
    }
    Ok(m.tally.total()? as f64 / m.wall_time_s)
}

/// Ratio of an achieved rate to a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency(pub f64);

impl Efficiency {
    pub fn ratio(self) -> f64 {
        self.0
    }

    /// Above 1 the measurement and the machine description disagree.
    pub fn exceeds_bound(self) -> bool {
        self.0 > 1.0
    }

    /// Whole percent, rounded half-up.
    pub fn percent(self) -> i64 {
        round_half_up_percent(self.0)
    }
}

pub fn round_half_up_percent(ratio: f64) -> i64 {
    (ratio * 100.0 + 0.5).floor() as i64
}

/// Real over peak. Ratios above 1 are returned and logged, not rejected.
pub fn efficiency(real_rate: f64, peak_rate: f64) -> Result<Efficiency, MetricError> {
    ratio_to_bound(real_rate, peak_rate)
}

pub(crate) fn ratio_to_bound(real: f64, bound: f64) -> Result<Efficiency, MetricError> {
    if bound.is_nan() || bound <= 0.0 {
        return Err(MetricError::NonPositivePeak(bound));
    }
    let e = Efficiency(real / bound);
    if e.exceeds_bound() {
        log::warn!(
            "achieved rate {real:e} exceeds bound {bound:e}; measurement and machine spec disagree"
        );
    }
    Ok(e)
}

/// BOPs per byte of memory traffic.
pub fn operation_intensity(m: &Measurement) -> Result<f64, MetricError> {
    if m.bytes_accessed.is_nan() || m.bytes_accessed <= 0.0 {
        return Err(MetricError::OiUndefined);
    }
    Ok(m.tally.total()? as f64 / m.bytes_accessed)
}
