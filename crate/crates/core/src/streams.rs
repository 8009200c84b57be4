//! Seeded random streams and an order-preserving parallel map.
//!
//! Every random draw in the crate comes from `ChaCha8Rng::seed_from_u64(seed)`
//! switched to a numbered stream. Bootstrap draw `b` uses stream `b`; Monte
//! Carlo replication `r` of cell `c` uses stream `(c << 32) | r`. Work items
//! never share a generator, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of replication `rep` in cell `cell`.
pub fn cell_stream(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

/// Evaluates `f(0..count)` on `threads` workers and returns results in index order.
///
/// `threads == 0` uses rayon's default worker count.
pub fn par_map<T, F>(threads: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}
