//! Stream triad `a[i] = b[i] + s * c[i]`, the bandwidth probe used to fill
//! `mem_bandwidth_peak_bytes_per_s` in a machine file.

use std::hint::black_box;
use std::time::Instant;

use super::{alloc_vec, RunConfig, Workload, WorkloadError};
use crate::measurement::Measurement;
use crate::tally::BopsTally;

/// Arrays are sized to this multiple of the last-level cache by default.
pub const DEFAULT_CACHE_FACTOR: u64 = 4;

const SCALAR: f64 = 3.0;
const BYTES_PER_ELEMENT: f64 = 24.0;

/// Elements per array so that the three arrays together span `factor` times
/// the cache.
pub fn elements_for_cache(cache_bytes: u64, factor: u64) -> u64 {
    (u128::from(cache_bytes) * u128::from(factor))
        .div_ceil(BYTES_PER_ELEMENT as u128)
        .max(1)
        .min(u128::from(u64::MAX)) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamResult {
    /// Best-pass bandwidth, `24 * n / best_pass_s`.
    pub bandwidth_bytes_per_s: f64,
    pub best_pass_s: f64,
    pub pass_times_s: Vec<f64>,
    /// The best pass as a measurement: per element one multiply, one add,
    /// the loop increment and test, and three element accesses.
    pub measurement: Measurement,
}

fn triad(a: &mut [f64], b: &[f64], c: &[f64], s: f64) {
    for ((x, y), z) in a.iter_mut().zip(b).zip(c) {
        *x = y + s * z;
    }
}

pub fn run_stream_triad(cfg: &RunConfig) -> Result<StreamResult, WorkloadError> {
    cfg.validate()?;
    if cfg.workload != Workload::StreamTriad {
        return Err(WorkloadError::Config(
            "not a StreamTriad configuration".into(),
        ));
    }
    let n = cfg.n_elements;
    let mut a = alloc_vec(n, 0.0f64)?;
    let b = alloc_vec(n, 1.0f64)?;
    let c = alloc_vec(n, 2.0f64)?;
    let threads = (cfg.threads as usize).min(a.len()).max(1);
    let per = a.len().div_ceil(threads);

    let mut pass_times_s = Vec::with_capacity(cfg.iterations as usize);
    for _ in 0..cfg.iterations {
        let start = Instant::now();
        if threads == 1 {
            triad(&mut a, &b, &c, black_box(SCALAR));
        } else {
            std::thread::scope(|s| {
                for ((x, y), z) in a.chunks_mut(per).zip(b.chunks(per)).zip(c.chunks(per)) {
                    s.spawn(move || triad(x, y, z, black_box(SCALAR)));
                }
            });
        }
        black_box(&mut a);
        let t = start.elapsed().as_secs_f64();
        if t <= 0.0 {
            return Err(WorkloadError::Clock);
        }
        pass_times_s.push(t);
    }
    let expected = 1.0 + SCALAR * 2.0;
    if a.iter().any(|&x| x != expected) {
        return Err(WorkloadError::Verification("triad result mismatch".into()));
    }

    let best = pass_times_s.iter().copied().fold(f64::INFINITY, f64::min);
    let bytes = BYTES_PER_ELEMENT * n as f64;
    let tally = BopsTally::new(3, 1, 3).checked_mul(n)?;
    let measurement = Measurement::new("stream_triad", tally, best, bytes, cfg.threads)?;
    Ok(StreamResult {
        bandwidth_bytes_per_s: bytes / best,
        best_pass_s: best,
        pass_times_s,
        measurement,
    })
}
