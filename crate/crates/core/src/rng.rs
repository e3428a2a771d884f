//! Seeded randomness.
//!
//! Everything random in this crate draws from ChaCha8, a counter-based
//! generator whose output is fixed by its algorithm rather than by the
//! platform, so seeds reproduce the same data everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// In-place Fisher–Yates shuffle, walking from the back.
pub fn fisher_yates<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// `count` distinct values from `[0, n)` excluding `exclude`, in draw order.
pub(crate) fn sample_distinct_excluding(
    n: usize,
    count: usize,
    exclude: Option<usize>,
    rng: &mut SeededRng,
) -> Vec<u32> {
    let pool = n - usize::from(exclude.is_some());
    debug_assert!(count <= pool);
    rand::seq::index::sample(rng, pool, count)
        .into_iter()
        .map(|u| match exclude {
            Some(x) if u >= x => (u + 1) as u32,
            _ => u as u32,
        })
        .collect()
}
