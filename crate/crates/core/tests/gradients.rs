//! Analytic gradients against central differences and against each other.

mod common;

use common::*;
use sympopt::cost::{
    energy_cost, energy_grad_block, energy_grad_generic, fd_gradient_oracle, gap_grad,
    max_relative_deviation, partial_cost_grad, FactorMode, FactorObjective, Objective, FD_REL_TOL,
    FD_STEP,
};
use sympopt::hamiltonian::QuadraticHamiltonian;

fn check_fd(ham: &QuadraticHamiltonian, mode: FactorMode, seed: u64) -> f64 {
    let mut r = rng(seed);
    let f = random_factors(&mut r, ham.modes(), mode, 0.4);
    let obj = FactorObjective::new(ham, f.clone());
    let x = f.to_params();
    let (_, g) = obj.value_grad(&x).unwrap();
    let fd = fd_gradient_oracle(|p| obj.value(p).unwrap(), &x, FD_STEP);
    max_relative_deviation(&g, &fd)
}

#[test]
fn energy_gradient_generic_h() {
    for d in 1..=6 {
        for seed in 0..4 {
            let mut r = rng(100 * d as u64 + seed);
            let h = random_generic_h(&mut r, d);
            let dev = check_fd(&h, FactorMode::Energy, seed + 7);
            assert!(dev <= FD_REL_TOL, "d = {d}, seed = {seed}: {dev:e}");
        }
    }
}

#[test]
fn energy_gradient_block_h() {
    for d in 1..=6 {
        for seed in 0..4 {
            let mut r = rng(200 * d as u64 + seed);
            let h = random_block_h(&mut r, d);
            let dev = check_fd(&h, FactorMode::Energy, seed + 11);
            assert!(dev <= FD_REL_TOL, "d = {d}, seed = {seed}: {dev:e}");
        }
    }
}

#[test]
fn gap_gradient() {
    for d in 1..=6 {
        for seed in 0..3 {
            let mut r = rng(300 * d as u64 + seed);
            for h in [random_generic_h(&mut r, d), random_block_h(&mut r, d)] {
                let dev = check_fd(&h, FactorMode::Gap, seed + 13);
                assert!(dev <= FD_REL_TOL, "d = {d}, seed = {seed}: {dev:e}");
            }
        }
    }
}

#[test]
fn partial_gradient() {
    for d in 1..=6 {
        for k in 1..=d {
            let mut r = rng(400 * d as u64 + k as u64);
            for h in [random_generic_h(&mut r, d), random_block_h(&mut r, d)] {
                let dev = check_fd(&h, FactorMode::Partial(k), k as u64 + 17);
                assert!(dev <= FD_REL_TOL, "d = {d}, k = {k}: {dev:e}");
            }
        }
    }
}

#[test]
fn pm_coupled_gradients() {
    let mut r = rng(5);
    let v = random_spd(&mut r, 4, 1.0);
    let h = QuadraticHamiltonian::pm_coupled(v, 0.3).unwrap();
    for mode in [FactorMode::Energy, FactorMode::Gap, FactorMode::Partial(2)] {
        let dev = check_fd(&h, mode, 3);
        assert!(dev <= FD_REL_TOL, "{mode:?}: {dev:e}");
    }
}

#[test]
fn block_and_generic_paths_agree() {
    for d in 1..=8 {
        let mut r = rng(500 + d as u64);
        let h = random_block_h(&mut r, d);
        let generic = QuadraticHamiltonian::generic(h.matrix().clone()).unwrap();
        let f = random_factors(&mut r, d, FactorMode::Energy, 0.5);
        let gb = energy_grad_block(&f, &h).unwrap();
        let gg = energy_grad_generic(&f, &h).unwrap();
        assert!(energy_grad_block(&f, &generic).is_err());
        for (a, b) in [(&gb.g1, &gg.g1), (&gb.g2, &gg.g2), (&gb.g3, &gg.g3)] {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "d = {d}");
        }
        let eb = energy_cost(&f, &h).unwrap();
        let eg = energy_cost(&f, &generic).unwrap();
        assert!((eb - eg).abs() <= 1e-10 * eg.abs().max(1.0));
    }
}

#[test]
fn gap_outer_product_form_matches_slab_form() {
    for d in 1..=6 {
        let mut r = rng(600 + d as u64);
        for h in [random_generic_h(&mut r, d), random_block_h(&mut r, d)] {
            let f = random_factors(&mut r, d, FactorMode::Gap, 0.5);
            let g1 = gap_grad(&f, &h).unwrap();
            let (_, g2) = partial_cost_grad(&f, &h, 1).unwrap();
            for (a, b) in [(&g1.g1, &g2.g1), (&g1.g2, &g2.g2), (&g1.g3, &g2.g3)] {
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "d = {d}");
            }
        }
    }
}

#[test]
fn corrupted_gradient_is_caught() {
    let mut r = rng(9);
    let h = random_generic_h(&mut r, 3);
    let f = random_factors(&mut r, 3, FactorMode::Energy, 0.4);
    let obj = FactorObjective::new(&h, f.clone());
    let x = f.to_params();
    let (_, mut g) = obj.value_grad(&x).unwrap();
    g[4] *= 1.0 + 1e-3;
    let fd = fd_gradient_oracle(|p| obj.value(p).unwrap(), &x, FD_STEP);
    assert!(max_relative_deviation(&g, &fd) > FD_REL_TOL);
}
