//! DC-Roofline upper-bound model.
//!
//! The attainable rate at operation intensity `oi` is
//! `min(oi * bandwidth, peak)`. Ceilings lower either side: a compute
//! ceiling is `peak * ilp_efficiency * simd_scale`, a memory ceiling is a
//! lower bandwidth such as the one measured with prefetching disabled.

mod plot;

pub use plot::{emit_plot, PlotFormat, PlotOptions, CSV_HEADER};

use serde::Serialize;
use thiserror::Error;

use crate::machine::MachineSpec;
use crate::metrics::{self, peak_bops, peak_flops, Efficiency, MetricError};

/// Relative tolerance under which the two roof branches count as equal.
pub const RIDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RooflineError {
    #[error("operation intensity must be a finite value >= 0, got {0}")]
    InvalidOi(f64),
    #[error("machine `{0}` has no flops_per_cycle; classic FLOPS mode is unavailable")]
    MissingFlops(String),
    #[error("ceiling `{name}`: {msg}")]
    InvalidCeiling { name: String, msg: String },
    #[error("workload point `{name}`: {msg}")]
    InvalidPoint { name: String, msg: String },
    #[error("nothing to plot: {0}")]
    EmptyModel(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Binding {
    MemoryBound,
    ComputeBound,
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Attained {
    pub rate: f64,
    pub binding: Binding,
}

fn check_oi(oi: f64) -> Result<(), RooflineError> {
    if oi.is_finite() && oi >= 0.0 {
        Ok(())
    } else {
        Err(RooflineError::InvalidOi(oi))
    }
}

/// `min(oi * bandwidth, compute)` with the side that binds.
pub fn roof(compute: f64, bandwidth: f64, oi: f64) -> Attained {
    let memory = oi * bandwidth;
    let binding = if (memory - compute).abs() <= RIDGE_TOLERANCE * compute.abs() {
        Binding::Ridge
    } else if memory < compute {
        Binding::MemoryBound
    } else {
        Binding::ComputeBound
    };
    Attained {
        rate: memory.min(compute),
        binding,
    }
}

pub fn attained_peak(spec: &MachineSpec, oi: f64) -> Result<Attained, RooflineError> {
    check_oi(oi)?;
    Ok(roof(
        peak_bops(spec),
        spec.mem_bandwidth_peak_bytes_per_s,
        oi,
    ))
}

pub fn attained_efficiency(real_rate: f64, attained: f64) -> Result<Efficiency, RooflineError> {
    Ok(metrics::ratio_to_bound(real_rate, attained)?)
}

/// Operation intensity where the bandwidth diagonal meets the peak roof.
pub fn ridge_oi(spec: &MachineSpec) -> f64 {
    peak_bops(spec) / spec.mem_bandwidth_peak_bytes_per_s
}

/// Peak scaled by ILP efficiency alone.
pub fn ilp_ceiling(spec: &MachineSpec) -> f64 {
    peak_bops(spec) * spec.ilp_efficiency
}

/// Peak scaled by ILP efficiency and SIMD scale.
pub fn compute_ceiling(spec: &MachineSpec) -> f64 {
    peak_bops(spec) * spec.ilp_efficiency * spec.simd_scale
}

pub fn attained_with_ceilings(ceiling_rate: f64, bw_ceiling: f64, oi: f64) -> f64 {
    (bw_ceiling * oi).min(ceiling_rate)
}

pub fn ceiling_efficiency(real_rate: f64, attained_c: f64) -> Result<Efficiency, RooflineError> {
    Ok(metrics::ratio_to_bound(real_rate, attained_c)?)
}

/// The FLOPS roofline of the same machine, for side-by-side comparison.
pub fn classic_flops_attained(
    spec: &MachineSpec,
    oi_flops: f64,
) -> Result<Attained, RooflineError> {
    check_oi(oi_flops)?;
    let peak = peak_flops(spec).ok_or_else(|| RooflineError::MissingFlops(spec.name.clone()))?;
    Ok(roof(peak, spec.mem_bandwidth_peak_bytes_per_s, oi_flops))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CeilingKind {
    Compute { level: f64 },
    Memory { bandwidth: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ceiling {
    pub name: String,
    #[serde(flatten)]
    pub kind: CeilingKind,
}

impl Ceiling {
    pub fn compute(name: impl Into<String>, level: f64) -> Self {
        Ceiling {
            name: name.into(),
            kind: CeilingKind::Compute { level },
        }
    }

    pub fn memory(name: impl Into<String>, bandwidth: f64) -> Self {
        Ceiling {
            name: name.into(),
            kind: CeilingKind::Memory { bandwidth },
        }
    }
}

/// Ceilings selectable by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CeilingChoice {
    Ilp,
    Simd,
    /// Bandwidth without prefetching, in bytes/s.
    Prefetch(f64),
}

impl CeilingChoice {
    pub fn build(self, spec: &MachineSpec) -> Ceiling {
        match self {
            CeilingChoice::Ilp => Ceiling::compute("ILP", ilp_ceiling(spec)),
            CeilingChoice::Simd => Ceiling::compute("SIMD", compute_ceiling(spec)),
            CeilingChoice::Prefetch(bw) => Ceiling::memory("no prefetch", bw),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadPoint {
    pub name: String,
    pub oi: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCheck {
    pub name: String,
    pub attained: Attained,
    /// The measured rate exceeds the roof at its intensity.
    pub above_roof: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflineModel {
    pub spec: MachineSpec,
    /// Compute ceilings by descending level, then memory ceilings by
    /// descending bandwidth.
    pub ceilings: Vec<Ceiling>,
    pub points: Vec<WorkloadPoint>,
}

impl RooflineModel {
    pub fn new(
        spec: MachineSpec,
        mut ceilings: Vec<Ceiling>,
        points: Vec<WorkloadPoint>,
    ) -> Result<Self, RooflineError> {
        spec.validate()
            .map_err(|e| RooflineError::EmptyModel(e.to_string()))?;
        let peak = peak_bops(&spec);
        let bw = spec.mem_bandwidth_peak_bytes_per_s;
        for c in &ceilings {
            let bad = |msg: String| RooflineError::InvalidCeiling {
                name: c.name.clone(),
                msg,
            };
            match c.kind {
                CeilingKind::Compute { level } => {
                    if !(level.is_finite() && level > 0.0 && level <= peak) {
                        return Err(bad(format!("level {level} must be in (0, {peak}]")));
                    }
                }
                CeilingKind::Memory { bandwidth } => {
                    if !(bandwidth.is_finite() && bandwidth > 0.0 && bandwidth <= bw) {
                        return Err(bad(format!("bandwidth {bandwidth} must be in (0, {bw}]")));
                    }
                }
            }
        }
        for p in &points {
            let bad = |msg: String| RooflineError::InvalidPoint {
                name: p.name.clone(),
                msg,
            };
            if !(p.oi.is_finite() && p.oi > 0.0) {
                return Err(bad(format!("oi must be > 0, got {}", p.oi)));
            }
            if !(p.rate.is_finite() && p.rate > 0.0) {
                return Err(bad(format!("rate must be > 0, got {}", p.rate)));
            }
        }
        ceilings.sort_by(|a, b| {
            let key = |c: &Ceiling| match c.kind {
                CeilingKind::Compute { level } => (0, -level),
                CeilingKind::Memory { bandwidth } => (1, -bandwidth),
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        });
        Ok(RooflineModel {
            spec,
            ceilings,
            points,
        })
    }

    pub fn peak(&self) -> f64 {
        peak_bops(&self.spec)
    }

    pub fn bandwidth(&self) -> f64 {
        self.spec.mem_bandwidth_peak_bytes_per_s
    }

    pub fn ridge_oi(&self) -> f64 {
        ridge_oi(&self.spec)
    }

    pub fn check_points(&self) -> Vec<PointCheck> {
        self.points
            .iter()
            .map(|p| {
                let attained = roof(self.peak(), self.bandwidth(), p.oi);
                PointCheck {
                    name: p.name.clone(),
                    attained,
                    above_roof: p.rate > attained.rate * (1.0 + RIDGE_TOLERANCE),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e5645() -> MachineSpec {
        MachineSpec {
            name: "E5645".into(),
            num_cpu: 1,
            num_core: 6,
            frequency_hz: 2.4e9,
            bops_per_cycle: 6.0,
            flops_per_cycle: Some(4.0),
            mem_bandwidth_peak_bytes_per_s: 13.8e9,
            ilp_efficiency: 0.5,
            simd_scale: 0.5,
        }
    }

    #[test]
    fn attained_examples() {
        let s = e5645();
        let a = attained_peak(&s, 3.0).unwrap();
        assert_eq!(a.binding, Binding::MemoryBound);
        assert!((a.rate - 41.4e9).abs() <= 1e-6);
        assert_eq!(a.rate, 3.0 * 13.8e9);
        let z = attained_peak(&s, 0.0).unwrap();
        assert_eq!((z.rate, z.binding), (0.0, Binding::MemoryBound));
        let r = attained_peak(&s, 86.4e9 / 13.8e9).unwrap();
        assert_eq!(r.binding, Binding::Ridge);
        assert!((r.rate - 86.4e9).abs() / 86.4e9 < 1e-12);
        assert!((ridge_oi(&s) - 6.2609).abs() < 1e-4);
        assert_eq!(
            attained_peak(&s, 100.0).unwrap().binding,
            Binding::ComputeBound
        );
        assert!(attained_peak(&s, -1.0).is_err());
        assert!(attained_peak(&s, f64::NAN).is_err());
    }

    #[test]
    fn efficiencies() {
        let e = attained_efficiency(28e9, 41.4e9).unwrap();
        assert_eq!(e.percent(), 68);
        assert_eq!(attained_efficiency(5.0, 5.0).unwrap().ratio(), 1.0);
        assert_eq!(attained_efficiency(2.7e9, 5.3e9).unwrap().percent(), 51);
        assert!(attained_efficiency(1.0, 0.0).is_err());
        assert_eq!(ceiling_efficiency(27e9, 41.4e9).unwrap().percent(), 65);
        assert_eq!(ceiling_efficiency(3.5e9, 5.3e9).unwrap().percent(), 66);
        assert!(ceiling_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn ceilings() {
        let mut s = e5645();
        assert_eq!(ilp_ceiling(&s), 43.2e9);
        assert_eq!(compute_ceiling(&s), 21.6e9);
        s.ilp_efficiency = 1.0;
        s.simd_scale = 1.0;
        assert_eq!(compute_ceiling(&s), peak_bops(&s));
        assert_eq!(attained_with_ceilings(43.2e9, 13.8e9, 3.0), 3.0 * 13.8e9);
        assert_eq!(attained_with_ceilings(21.6e9, 13.8e9, 3.0), 21.6e9);
        assert_eq!(attained_with_ceilings(5.0, 7.0, 0.0), 0.0);
    }

    #[test]
    fn classic_mode() {
        let s = e5645();
        let a = classic_flops_attained(&s, 6.1).unwrap();
        assert_eq!((a.rate, a.binding), (57.6e9, Binding::ComputeBound));
        assert_eq!(classic_flops_attained(&s, 0.0).unwrap().rate, 0.0);
        assert!((classic_flops_attained(&s, 0.01).unwrap().rate - 0.138e9).abs() < 1.0);
        let mut no = s;
        no.flops_per_cycle = None;
        assert!(matches!(
            classic_flops_attained(&no, 1.0),
            Err(RooflineError::MissingFlops(_))
        ));
    }

    #[test]
    fn model_sorts_and_validates() {
        let s = e5645();
        let m = RooflineModel::new(
            s.clone(),
            vec![
                CeilingChoice::Prefetch(13.2e9).build(&s),
                CeilingChoice::Simd.build(&s),
                CeilingChoice::Ilp.build(&s),
            ],
            vec![],
        )
        .unwrap();
        let names: Vec<_> = m.ceilings.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["ILP", "SIMD", "no prefetch"]);
        assert!(RooflineModel::new(s.clone(), vec![Ceiling::compute("x", 1e12)], vec![]).is_err());
        assert!(RooflineModel::new(s.clone(), vec![Ceiling::memory("x", 20e9)], vec![]).is_err());
        let bad = WorkloadPoint {
            name: "p".into(),
            oi: 0.0,
            rate: 1.0,
        };
        assert!(RooflineModel::new(s, vec![], vec![bad]).is_err());
    }

    #[test]
    fn above_roof_flagged() {
        let s = e5645();
        let pts = vec![
            WorkloadPoint {
                name: "ok".into(),
                oi: 3.0,
                rate: 28e9,
            },
            WorkloadPoint {
                name: "high".into(),
                oi: 1.0,
                rate: 20e9,
            },
        ];
        let m = RooflineModel::new(s, vec![], pts).unwrap();
        let c = m.check_points();
        assert!(!c[0].above_roof);
        assert!(c[1].above_roof);
    }

    proptest! {
        #[test]
        fn monotone_and_flat_past_ridge(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let s = e5645();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (ra, rb) = (attained_peak(&s, lo).unwrap(), attained_peak(&s, hi).unwrap());
            prop_assert!(ra.rate <= rb.rate);
            if lo >= ridge_oi(&s) {
                prop_assert_eq!(ra.rate, peak_bops(&s));
            }
        }

        #[test]
        fn ceilings_stay_under_roof(oi in 0.0f64..100.0, cf in 0.01f64..=1.0, bf in 0.01f64..=1.0) {
            let s = e5645();
            let c = peak_bops(&s) * cf;
            let bw = s.mem_bandwidth_peak_bytes_per_s * bf;
            prop_assert!(attained_with_ceilings(c, bw, oi) <= attained_peak(&s, oi).unwrap().rate);
        }

        #[test]
        fn binding_is_argmin(compute in 1.0f64..1e12, bw in 1.0f64..1e11, oi in 0.0f64..100.0) {
            let a = roof(compute, bw, oi);
            let mem = oi * bw;
            match a.binding {
                Binding::Ridge => prop_assert!((mem - compute).abs() <= RIDGE_TOLERANCE * compute),
                Binding::MemoryBound => prop_assert!(mem < compute),
                Binding::ComputeBound => prop_assert!(mem > compute),
            }
            prop_assert_eq!(a.rate, mem.min(compute));
        }
    }
}
