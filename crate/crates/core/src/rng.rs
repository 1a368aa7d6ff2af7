use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub type Rng = ChaCha8Rng;

/// Deterministic generator for a seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One `N(0, 1)` draw.
pub fn normal<T: Scalar>(rng: &mut Rng) -> T {
    let v: f64 = StandardNormal.sample(rng);
    T::of(v)
}

pub fn normal_vec<T: Scalar>(rng: &mut Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| normal(rng)).collect()
}
