//! Seeded random sampling. Every randomized routine derives one independent
//! ChaCha stream per trial from the caller's seed, so results do not depend
//! on evaluation order.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::Placement;
use crate::Scalar;

/// RNG for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(dim, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::lit(x)
    })
}

/// Placement of `n` points with i.i.d. standard normal coordinates.
pub fn gaussian_placement<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    rng: &mut R,
) -> Placement<T> {
    Placement::new(dim, (0..n).map(|_| gaussian_vector(dim, rng)).collect())
        .expect("gaussian coordinates are finite")
}

/// Vector with coordinates uniform in `[-radius, radius]`.
pub fn box_vector<T: Scalar, R: Rng + ?Sized>(len: usize, radius: T, rng: &mut R) -> DVector<T> {
    DVector::from_fn(len, |_, _| T::lit(rng.random_range(-1.0..=1.0)) * radius)
}
