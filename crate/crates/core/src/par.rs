//! Deterministic block-partitioned sampling.
//!
//! Sample index ranges are cut into fixed blocks of [`BLOCK`] indices. Each
//! block draws from its own ChaCha stream keyed by `(seed, tag, block)`, so
//! the values produced for a given index never depend on how many workers
//! ran the job. Results come back in block order.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) const BLOCK: usize = 1024;

/// Stream namespaces, so audits sharing a seed never share random draws.
pub(crate) mod tag {
    pub const BALL: u64 = 1;
    pub const NCS: u64 = 2;
    pub const MOTION: u64 = 3;
    pub const COVERAGE: u64 = 4;
    pub const CONGRUENCE_FWD: u64 = 5;
    pub const CONGRUENCE_INV: u64 = 6;
    pub const MEMBERS: u64 = 7;
    pub const NET: u64 = 8;
    pub const UNIVERSAL: u64 = 9;
    pub const CONVEXITY: u64 = 10;
    pub const PROBES: u64 = 11;
    pub const CONTAINMENT: u64 = 12;
}

pub(crate) fn rng_for(seed: u64, tag: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

/// Runs `f` once per block of `0..n` and returns the block results in order.
pub(crate) fn map_blocks<T, F>(n: usize, seed: u64, tag: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>, &mut ChaCha8Rng) -> T + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let run = |b: usize| {
        let start = b * BLOCK;
        let mut rng = rng_for(seed, tag, b as u64);
        f(start..(start + BLOCK).min(n), &mut rng)
    };
    if workers <= 1 || blocks <= 1 {
        return (0..blocks).map(run).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..blocks).into_par_iter().map(run).collect()),
        Err(_) => (0..blocks).map(run).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn worker_count_does_not_change_draws() {
        let draw = |workers| {
            map_blocks(5000, 7, tag::BALL, workers, |r, rng| r.map(|_| rng.random::<u64>()).collect::<Vec<_>>())
        };
        assert_eq!(draw(1), draw(4));
        assert_eq!(draw(1).iter().map(Vec::len).sum::<usize>(), 5000);
    }

    #[test]
    fn empty_range_has_no_blocks() {
        let out = map_blocks(0, 1, tag::BALL, 4, |r, _| r.len());
        assert!(out.is_empty());
    }
}
