//! Seeded generators. Every random object in the crate is drawn from a
//! ChaCha stream keyed by `(seed, stream)`, so results do not depend on the
//! order in which samples are evaluated.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measures::DensityOperator;
use crate::subspace::Subspace;

pub type SeededRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniformly distributed unit vector in `R^d`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Haar-random `k`-dimensional subspace of `R^d`.
pub fn subspace<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Subspace {
    subspace_within(rng, &Subspace::full(d), k)
}

/// Random `k`-dimensional subspace of `parent` (`k` is clamped to `dim parent`).
pub fn subspace_within<R: Rng + ?Sized>(rng: &mut R, parent: &Subspace, k: usize) -> Subspace {
    let k = k.min(parent.rank());
    if k == parent.rank() {
        return parent.clone();
    }
    loop {
        let coeffs = gaussian_matrix(rng, parent.rank(), k);
        let vectors = parent.basis() * coeffs;
        let s = Subspace::from_columns(&vectors).expect("ambient dimension is consistent");
        if s.rank() == k {
            return s;
        }
    }
}

/// Random density operator `G Gᵀ / tr(G Gᵀ)` with `G` standard normal.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let g = gaussian_matrix(rng, d, d);
    let t = &g * g.transpose();
    let tr = t.trace();
    DensityOperator::new(t / tr).expect("G Gᵀ / tr is a density operator")
}
