#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sympopt::cost::{FactorMode, TriangularFactors};
use sympopt::hamiltonian::QuadraticHamiltonian;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// `AAᵀ/n + shift·I`, well conditioned for moderate shifts.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let a = random_matrix(rng, n, n);
    &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * shift
}

pub fn random_generic_h(rng: &mut ChaCha8Rng, d: usize) -> QuadraticHamiltonian {
    QuadraticHamiltonian::generic(random_spd(rng, 2 * d, 0.5)).unwrap()
}

pub fn random_block_h(rng: &mut ChaCha8Rng, d: usize) -> QuadraticHamiltonian {
    QuadraticHamiltonian::block_diagonal(random_spd(rng, d, 0.5)).unwrap()
}

pub fn random_factors(
    rng: &mut ChaCha8Rng,
    d: usize,
    mode: FactorMode,
    scale: f64,
) -> TriangularFactors {
    let mut f = TriangularFactors::zeros(d, mode).unwrap();
    let x: Vec<f64> = (0..f.num_params()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    f.set_params(&x).unwrap();
    f
}
