//! Uninstrumented reference copy of the single-threaded Sort kernel, written
//! without any counter hooks. Used to check that timing mode carries no
//! counting overhead.

use std::time::Instant;

use super::data::{generate, multiset_checksum};
use super::sort::{verify, INSERTION_CUTOFF};
use super::WorkloadError;

fn insertion(a: &mut [i64], lo: usize, hi: usize) {
    for k in lo + 1..=hi {
        let v = a[k];
        let mut j = k;
        while j > lo && a[j - 1] > v {
            a[j] = a[j - 1];
            j -= 1;
        }
        a[j] = v;
    }
}

fn order(a: &mut [i64], x: usize, y: usize) {
    if a[y] < a[x] {
        a.swap(x, y);
    }
}

fn quicksort(a: &mut [i64], mut lo: usize, mut hi: usize) {
    loop {
        if hi - lo < INSERTION_CUTOFF {
            insertion(a, lo, hi);
            return;
        }
        let mid = lo + (hi - lo) / 2;
        order(a, lo, mid);
        order(a, lo, hi);
        order(a, mid, hi);
        let pivot = a[mid];
        let (mut i, mut j) = (lo, hi);
        loop {
            loop {
                i += 1;
                if a[i] >= pivot {
                    break;
                }
            }
            loop {
                j -= 1;
                if a[j] <= pivot {
                    break;
                }
            }
            if i >= j {
                break;
            }
            a.swap(i, j);
        }
        if j - lo < hi - j {
            quicksort(a, lo, j);
            lo = j + 1;
        } else {
            quicksort(a, j + 1, hi);
            hi = j;
        }
    }
}

pub fn baseline_sort(a: &mut [i64]) {
    if a.len() > 1 {
        let hi = a.len() - 1;
        quicksort(a, 0, hi);
    }
}

/// Wall time of [`baseline_sort`] on the same data a Sort run with this
/// `n` and `seed` would use. Generation and verification are not timed.
pub fn time_baseline_sort(n: u64, seed: u64) -> Result<f64, WorkloadError> {
    let mut data = generate(n, seed, 1)?;
    let expected = multiset_checksum(&data);
    let start = Instant::now();
    baseline_sort(&mut data);
    let t = start.elapsed().as_secs_f64();
    verify(&data, expected)?;
    if t <= 0.0 {
        return Err(WorkloadError::Clock);
    }
    Ok(t)
}
