//! Instrumented measuring tools: a parallel quicksort/merge Sort and a
//! stream-triad bandwidth probe.
//!
//! Each tool runs either in counting mode, where every basic operation is
//! tallied, or in timing mode, where the counting hooks are a zero-sized
//! no-op type and compile away.

pub mod baseline;
mod counter;
mod data;
mod sort;
mod stream;

use thiserror::Error;

use crate::measurement::MeasurementError;
use crate::tally::TallyOverflow;

pub use counter::{NoCount, OpCounter, TallyAccumulator};
pub use data::{generate, multiset_checksum, Checksum};
pub use sort::{run_sort, sort_counted, sort_uncounted, SortCounts, INSERTION_CUTOFF};
pub use stream::{elements_for_cache, run_stream_triad, StreamResult, DEFAULT_CACHE_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    Sort,
    StreamTriad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Counting,
    Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub workload: Workload,
    pub n_elements: u64,
    pub seed: u64,
    pub threads: u32,
    pub mode: Mode,
    /// Passes over the arrays; only used by the stream triad.
    pub iterations: u32,
}

impl RunConfig {
    pub fn sort(n_elements: u64, seed: u64, threads: u32, mode: Mode) -> Self {
        RunConfig {
            workload: Workload::Sort,
            n_elements,
            seed,
            threads,
            mode,
            iterations: 1,
        }
    }

    pub fn stream(n_elements: u64, iterations: u32, threads: u32) -> Self {
        RunConfig {
            workload: Workload::StreamTriad,
            n_elements,
            seed: 0,
            threads,
            mode: Mode::Timing,
            iterations,
        }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let min = match self.workload {
            Workload::Sort => 2,
            Workload::StreamTriad => 1,
        };
        if self.n_elements < min {
            return Err(WorkloadError::Config(format!(
                "n_elements must be >= {min}, got {}",
                self.n_elements
            )));
        }
        if self.threads == 0 {
            return Err(WorkloadError::Config("threads must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(WorkloadError::Config("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("cannot allocate {bytes} bytes")]
    Allocation { bytes: u128 },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("clock reported a non-positive duration")]
    Clock,
    #[error(transparent)]
    Overflow(#[from] TallyOverflow),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

pub(crate) fn alloc_vec<T: Clone>(len: u64, fill: T) -> Result<Vec<T>, WorkloadError> {
    let bytes = u128::from(len) * std::mem::size_of::<T>() as u128;
    let len = usize::try_from(len).map_err(|_| WorkloadError::Allocation { bytes })?;
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| WorkloadError::Allocation { bytes })?;
    v.resize(len, fill);
    Ok(v)
}
