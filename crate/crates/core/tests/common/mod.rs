#![allow(dead_code)]

use interval_entropy::rational::{int, ratio};
use interval_entropy::PwlMap;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random continuous self-map of `[0, 1]` with `1..=max_segments` segments,
/// breakpoints and values on the grid of multiples of `1/12`.
pub fn random_self_map(rng: &mut ChaCha8Rng, max_segments: usize) -> PwlMap {
    let n = rng.gen_range(1..=max_segments);
    let mut inner: Vec<usize> = sample(rng, 11, n - 1).into_iter().map(|i| i + 1).collect();
    inner.sort_unstable();
    let mut xs = vec![int(0)];
    xs.extend(inner.iter().map(|&i| ratio(i as i64, 12)));
    xs.push(int(1));
    let ys = (0..=n).map(|_| ratio(rng.gen_range(0..=12), 12)).collect();
    PwlMap::new(int(0), int(1), xs, ys).unwrap()
}
