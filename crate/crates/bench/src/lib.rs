//! Seeded instance generators shared by the benchmarks.

use cardmatch::graph::Instance;
use cardmatch::rational::int;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph on `n` nodes, each pair joined with probability `density`,
/// integer weights in `0..=max_weight`.
pub fn random_instance(seed: u64, n: usize, density: f64, max_weight: i64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v, int(rng.gen_range(0..=max_weight))));
            }
        }
    }
    Instance::new(n, edges).expect("generated pairs are distinct")
}
