//! Seeded random bodies.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::body::{Rep, SymBody};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// `V` body with `k` unit Gaussian generators, `k` uniform in `[n+1, 4n]`.
/// Rank-deficient draws are rejected and redrawn.
pub fn random_body<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymBody {
    loop {
        let k = rng.random_range(n + 1..=4 * n);
        let gens = (0..k).map(|_| random_unit(rng, n)).collect();
        if let Ok(b) = SymBody::new(n, Rep::V, gens) {
            return b;
        }
    }
}

pub fn random_corpus(seed: u64, n: usize, count: usize) -> Vec<SymBody> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| random_body(&mut rng, n)).collect()
}

/// Moves every vertex of `a` by a random vector of length `delta`, so the
/// result is within Hausdorff distance `delta` of `a`. Always returns a `V`
/// body.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, a: &SymBody, delta: f64) -> SymBody {
    let n = a.dim();
    loop {
        let gens = a
            .vertices()
            .iter()
            .map(|v| v + random_unit(rng, n) * delta)
            .collect();
        if let Ok(b) = SymBody::new(n, Rep::V, gens) {
            return b;
        }
    }
}
