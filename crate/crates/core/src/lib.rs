//! Basic operation (BOP) counting, performance metrics and the DC-Roofline
//! upper-bound model.
//!
//! - [`kernel`]: a small C-like kernel language with a static counter and a
//!   counting interpreter.
//! - [`workloads`]: instrumented Sort and stream-triad measuring tools.
//! - [`perf`]: BOPs estimation from hardware-counter exports.
//! - [`roofline`]: attained peak, ceilings and plot emission.
//! - [`report`]: per-workload efficiency tables.

pub mod kernel;
pub mod machine;
pub mod measurement;
pub mod metrics;
pub mod ops;
pub mod perf;
pub mod report;
pub mod roofline;
pub mod tally;
pub mod workloads;

pub use machine::{MachineError, MachineSpec, MACHINE_SCHEMA_VERSION};
pub use measurement::{Measurement, MeasurementError, TallySource, MEASUREMENT_SCHEMA_VERSION};
pub use metrics::{
    bops_rate, efficiency, operation_intensity, peak_bops, peak_flops, Efficiency, MetricError,
};
pub use ops::{BasicOpClass, OpCategory};
pub use report::{ReportBundle, ReportError, ReportOptions, ReportRow};
pub use roofline::{Attained, Binding, Ceiling, CeilingKind, RooflineModel, WorkloadPoint};
pub use tally::{BopsTally, TallyOverflow};
