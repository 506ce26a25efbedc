//! The Sort measuring tool: per-thread in-place quicksort (median-of-three,
//! Hoare partition, insertion sort below a cutoff) followed by pairwise merge
//! rounds.
//!
//! Counting follows the kernel-language classes. Every evaluated comparison
//! is one comparing BOP, including the failing test that ends a loop, since
//! these loops are data dependent. Every `+ - * /` on an index and every
//! `&&` is one arithmetic BOP. Every element read or write is one addressing
//! BOP. A counted `for` loop adds one comparing and one arithmetic BOP per
//! iteration, as in the kernel language.

use std::time::Instant;

use super::counter::{NoCount, OpCounter, TallyAccumulator};
use super::data::{generate, multiset_checksum};
use super::{alloc_vec, Mode, RunConfig, Workload, WorkloadError};
use crate::measurement::{Measurement, TallySource};
use crate::tally::BopsTally;

/// Partitions with fewer elements than this are finished by insertion sort.
pub const INSERTION_CUTOFF: usize = 32;

#[inline(always)]
fn insertion<C: OpCounter>(a: &mut [i64], lo: usize, hi: usize, c: &mut C) {
    for k in lo + 1..=hi {
        c.cmp(1);
        c.arith(1);
        let v = a[k];
        c.addr(1);
        let mut j = k;
        // while (j > lo && a[j-1] > v) { a[j] = a[j-1]; j--; }
        loop {
            c.cmp(1);
            c.arith(1);
            if j <= lo {
                break;
            }
            c.arith(1);
            c.addr(1);
            c.cmp(1);
            if a[j - 1] <= v {
                break;
            }
            a[j] = a[j - 1];
            c.arith(1);
            c.addr(2);
            j -= 1;
            c.arith(1);
        }
        a[j] = v;
        c.addr(1);
    }
}

#[inline(always)]
fn order<C: OpCounter>(a: &mut [i64], x: usize, y: usize, c: &mut C) {
    c.addr(2);
    c.cmp(1);
    if a[y] < a[x] {
        a.swap(x, y);
        c.addr(4);
    }
}

/// Sorts `a[lo..=hi]`.
pub(crate) fn quicksort<C: OpCounter>(a: &mut [i64], mut lo: usize, mut hi: usize, c: &mut C) {
    loop {
        c.arith(1);
        c.cmp(1);
        if hi - lo < INSERTION_CUTOFF {
            insertion(a, lo, hi, c);
            return;
        }
        let mid = lo + (hi - lo) / 2;
        c.arith(3);
        order(a, lo, mid, c);
        order(a, lo, hi, c);
        order(a, mid, hi, c);
        let pivot = a[mid];
        c.addr(1);

        // a[lo] <= pivot <= a[hi] act as sentinels for both scans.
        let (mut i, mut j) = (lo, hi);
        loop {
            loop {
                i += 1;
                c.arith(1);
                c.addr(1);
                c.cmp(1);
                if a[i] >= pivot {
                    break;
                }
            }
            loop {
                j -= 1;
                c.arith(1);
                c.addr(1);
                c.cmp(1);
                if a[j] <= pivot {
                    break;
                }
            }
            c.cmp(1);
            if i >= j {
                break;
            }
            a.swap(i, j);
            c.addr(4);
        }

        // Recurse on the smaller side, iterate on the larger.
        c.arith(2);
        c.cmp(1);
        if j - lo < hi - j {
            quicksort(a, lo, j, c);
            lo = j + 1;
        } else {
            quicksort(a, j + 1, hi, c);
            hi = j;
        }
        c.arith(1);
    }
}

/// Merges the sorted runs `src[..mid]` and `src[mid..]` into `dst`.
fn merge_runs<C: OpCounter>(src: &[i64], mid: usize, dst: &mut [i64], c: &mut C) {
    let end = src.len();
    let (mut i, mut j, mut k) = (0, mid, 0);
    loop {
        c.cmp(2);
        c.arith(1);
        if !(i < mid && j < end) {
            break;
        }
        c.addr(2);
        c.cmp(1);
        if src[j] < src[i] {
            dst[k] = src[j];
            j += 1;
        } else {
            dst[k] = src[i];
            i += 1;
        }
        c.addr(2);
        c.arith(2);
        k += 1;
    }
    for (s, d) in [(i, mid), (j, end)] {
        let rest = d - s;
        dst[k..k + rest].copy_from_slice(&src[s..d]);
        // Loop control plus one read, one write, two index increments.
        c.cmp(rest as u64);
        c.arith(3 * rest as u64);
        c.addr(2 * rest as u64);
        k += rest;
    }
}

fn chunk_bounds(n: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|k| k * n / parts).collect()
}

/// Sorts `data` with `threads` workers and returns each worker's counter.
fn parallel_sort<C: OpCounter>(
    data: &mut Vec<i64>,
    threads: usize,
) -> Result<Vec<C>, WorkloadError> {
    let n = data.len();
    let threads = threads.clamp(1, n.max(1));
    let bounds = chunk_bounds(n, threads);
    let mut counters: Vec<C> = (0..threads).map(|_| C::default()).collect();

    std::thread::scope(|s| {
        let mut rest: &mut [i64] = data;
        let mut handles = Vec::with_capacity(threads);
        for (w, c) in bounds.windows(2).zip(counters.iter_mut()) {
            let (chunk, tail) = rest.split_at_mut(w[1] - w[0]);
            rest = tail;
            handles.push(s.spawn(move || {
                if chunk.len() > 1 {
                    quicksort(chunk, 0, chunk.len() - 1, c);
                }
            }));
        }
        for h in handles {
            h.join().expect("sort worker panicked");
        }
    });

    if threads == 1 {
        return Ok(counters);
    }
    let mut runs = bounds;
    let mut scratch = alloc_vec(n as u64, 0i64)?;
    let mut src_is_data = true;
    while runs.len() > 2 {
        let (src, dst): (&[i64], &mut [i64]) = if src_is_data {
            (&data[..], &mut scratch[..])
        } else {
            (&scratch[..], &mut data[..])
        };
        let mut next = vec![0];
        std::thread::scope(|s| {
            let mut dst_rest = dst;
            let mut counter_iter = counters.iter_mut();
            let mut p = 0;
            while p + 1 < runs.len() {
                let lo = runs[p];
                let (mid, hi) = if p + 2 < runs.len() {
                    (runs[p + 1], runs[p + 2])
                } else {
                    (runs[p + 1], runs[p + 1])
                };
                let (out, tail) = dst_rest.split_at_mut(hi - lo);
                dst_rest = tail;
                let c = counter_iter.next().expect("one counter per merge");
                let input = &src[lo..hi];
                s.spawn(move || merge_runs(input, mid - lo, out, c));
                next.push(hi);
                p += 2;
            }
        });
        runs = next;
        src_is_data = !src_is_data;
    }
    if !src_is_data {
        data.copy_from_slice(&scratch);
    }
    Ok(counters)
}

/// Outcome of a counted sort: tally and logical bytes moved (8 per element
/// read or write).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortCounts {
    pub tally: BopsTally,
    pub bytes_accessed: f64,
}

pub fn sort_counted(data: &mut Vec<i64>, threads: u32) -> Result<SortCounts, WorkloadError> {
    let counters = parallel_sort::<TallyAccumulator>(data, threads as usize)?;
    let tally = TallyAccumulator::merge(&counters)?;
    Ok(SortCounts {
        tally,
        bytes_accessed: tally.addressing as f64 * 8.0,
    })
}

pub fn sort_uncounted(data: &mut Vec<i64>, threads: u32) -> Result<(), WorkloadError> {
    parallel_sort::<NoCount>(data, threads as usize).map(|_| ())
}

pub(crate) fn verify(sorted: &[i64], expected: super::Checksum) -> Result<(), WorkloadError> {
    if let Some(k) = sorted.windows(2).position(|w| w[0] > w[1]) {
        return Err(WorkloadError::Verification(format!(
            "output not ascending at index {k}"
        )));
    }
    if multiset_checksum(sorted) != expected {
        return Err(WorkloadError::Verification(
            "output is not a permutation of the input".into(),
        ));
    }
    Ok(())
}

/// Runs the Sort tool. Generation and verification are excluded from the
/// timed region. In timing mode the tally is absent; combine with a counting
/// run via [`Measurement::with_counts_from`].
pub fn run_sort(cfg: &RunConfig) -> Result<Measurement, WorkloadError> {
    cfg.validate()?;
    if cfg.workload != Workload::Sort {
        return Err(WorkloadError::Config("not a Sort configuration".into()));
    }
    let mut data = generate(cfg.n_elements, cfg.seed, cfg.threads)?;
    let expected = multiset_checksum(&data);

    let start = Instant::now();
    let counts = match cfg.mode {
        Mode::Counting => Some(sort_counted(&mut data, cfg.threads)?),
        Mode::Timing => {
            sort_uncounted(&mut data, cfg.threads)?;
            None
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed <= 0.0 {
        return Err(WorkloadError::Clock);
    }
    verify(&data, expected)?;

    let mut m = Measurement::new("sort", BopsTally::ZERO, elapsed, 0.0, cfg.threads)?;
    match counts {
        Some(c) => {
            m.tally = c.tally;
            m.bytes_accessed = c.bytes_accessed;
        }
        None => m.tally_source = TallySource::Absent,
    }
    Ok(m)
}
