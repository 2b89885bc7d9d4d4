//! Seeded, counter-based random streams.
//!
//! Every randomized scan derives an independent ChaCha stream per sample
//! index from a single `u64` seed, so results do not depend on scheduling.

use nalgebra::{DMatrix, RealField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Cplx, Real};

/// Independent stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform fractional coordinate pair in `[0, 1)^2`.
pub fn uniform_fractional<T: Real, R: Rng>(rng: &mut R) -> (T, T) {
    (T::lit(rng.random::<f64>()), T::lit(rng.random::<f64>()))
}

/// Unit direction in the plane, uniform in angle.
pub fn unit_direction<T: Real, R: Rng>(rng: &mut R) -> [T; 2] {
    let a = T::lit(rng.random::<f64>() * std::f64::consts::TAU);
    [a.cos(), a.sin()]
}

/// Uniform angle in `[-pi, pi)`.
pub fn uniform_angle<T: Real, R: Rng>(rng: &mut R) -> T {
    T::lit((rng.random::<f64>() - 0.5) * std::f64::consts::TAU)
}

fn gaussian<T: Real, R: Rng>(rng: &mut R) -> Cplx<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cplx::new(T::lit(re), T::lit(im))
}

/// Unit vector in `C^dim` drawn from the rotation-invariant distribution.
pub fn unit_vector<T: Real, R: Rng>(rng: &mut R, dim: usize) -> Vec<Cplx<T>> {
    loop {
        let v: Vec<Cplx<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if norm > T::lit(1e-6) {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` absorbed into `Q`.
pub fn unitary<T: Real + RealField, R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Cplx<T>> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian::<T, R>(rng));
    let (q, r) = g.qr().unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let modulus = Cplx::norm(d);
        let phase = if modulus > T::zero() {
            d / modulus
        } else {
            Cplx::new(T::one(), T::zero())
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}
