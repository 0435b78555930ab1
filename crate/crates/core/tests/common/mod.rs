#![allow(dead_code)]

use cardmatch::graph::Instance;
use cardmatch::rational::int;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi style instance with integer weights drawn from `lo..=hi`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, density: f64, lo: i64, hi: i64) -> Instance {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v, int(rng.gen_range(lo..=hi))));
            }
        }
    }
    Instance::new(n, edges).unwrap()
}

/// The instance families used by the property suites: `count` nonnegative
/// instances cycling through the three densities, plus `signed` instances
/// with weights in [-10, 10].
pub fn suite(seed: u64, count: usize, signed: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities = [0.3, 0.6, 0.9];
    let mut out = Vec::new();
    for i in 0..count {
        let n = rng.gen_range(2..=14);
        out.push(random_instance(&mut rng, n, densities[i % 3], 0, 20));
    }
    for i in 0..signed {
        let n = rng.gen_range(2..=14);
        out.push(random_instance(&mut rng, n, densities[i % 3], -10, 10));
    }
    out
}
