//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, stream)`. The
//! generator is counter based, so stream `i` of a run never overlaps stream
//! `j` and parallel workers can be handed disjoint streams without any
//! coordination. Monte Carlo loops are cut into fixed-size blocks, block `b`
//! always uses stream `b`, and partial results are merged in block order, so
//! outputs do not depend on the number of threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Default block length for blocked Monte Carlo loops.
pub const BLOCK_SIZE: u64 = 1 << 14;

#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on the half-open interval [0, 1) with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        self.inner.random_range(0..n)
    }

    #[inline]
    pub fn coin(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Runs `total` Monte Carlo repetitions split into blocks of `BLOCK_SIZE`.
///
/// `work(rng, count)` handles one block and returns its partial result;
/// partials are folded with `merge` in block order. Block `b` draws from
/// stream `stream_base + b` of `seed`.
pub fn blocked<T, W, M>(seed: u64, stream_base: u64, total: u64, work: W, init: T, merge: M) -> T
where
    T: Send,
    W: Fn(&mut StreamRng, u64) -> T + Sync,
    M: Fn(T, T) -> T,
{
    let blocks = total.div_ceil(BLOCK_SIZE);
    let parts: Vec<T> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(total - b * BLOCK_SIZE);
            let mut rng = StreamRng::new(seed, stream_base + b);
            work(&mut rng, count)
        })
        .collect();
    parts.into_iter().fold(init, merge)
}
