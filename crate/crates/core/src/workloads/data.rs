//! Input generation and order-independent checksums.
//!
//! Values come from ChaCha8 seeded with the run seed. Each block of
//! `BLOCK` elements seeks to its own position in the keystream, so blocks can
//! be filled in parallel and the data never depends on the thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{alloc_vec, WorkloadError};

const BLOCK: usize = 1 << 16;

pub fn generate(n: u64, seed: u64, threads: u32) -> Result<Vec<i64>, WorkloadError> {
    let mut out = alloc_vec(n, 0i64)?;
    let blocks: Vec<(usize, &mut [i64])> = out.chunks_mut(BLOCK).enumerate().collect();
    let per_thread = blocks.len().div_ceil(threads.max(1) as usize).max(1);
    let mut blocks = blocks;
    std::thread::scope(|s| {
        while !blocks.is_empty() {
            let take = per_thread.min(blocks.len());
            let mine: Vec<_> = blocks.drain(..take).collect();
            s.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for (b, chunk) in mine {
                    // Two 32-bit words per u64.
                    rng.set_word_pos((b * BLOCK * 2) as u128);
                    for v in chunk.iter_mut() {
                        *v = rng.next_u64() as i64;
                    }
                }
            });
        }
    });
    Ok(out)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Multiset fingerprint: equal for any permutation of the same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checksum {
    pub len: u64,
    pub sum: u64,
    pub mixed_sum: u64,
    pub mixed_xor: u64,
}

pub fn multiset_checksum(values: &[i64]) -> Checksum {
    let mut c = Checksum {
        len: values.len() as u64,
        sum: 0,
        mixed_sum: 0,
        mixed_xor: 0,
    };
    for &v in values {
        let m = mix(v as u64);
        c.sum = c.sum.wrapping_add(v as u64);
        c.mixed_sum = c.mixed_sum.wrapping_add(m);
        c.mixed_xor ^= mix(m);
    }
    c
}
