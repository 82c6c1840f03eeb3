//! Ground-state energy cost `¼ tr(L₃ H L₃ᵀ)` and its gradients.
//!
//! Two evaluation routes exist. The generic one forms `L₃` and `K = L₃H` as
//! `2d × 2d` matrices and reads the gradient blocks off `K`. The block-diagonal
//! route, for `H = V ⊕ I`, only ever multiplies `d × d` matrices.
//!
//! Gradients returned here are the true derivatives with respect to the
//! symmetric matrices, i.e. half of the `¼∇tr` expressions that carry the
//! factor from `∇_L ¼tr(LHLᵀ) = ½LH` implicitly.

use nalgebra::DMatrix;

use super::factors::{FactorGradient, FactorMode, TriangularFactors};
use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::ops::{frob_dot, mul};

/// Blocks of `L₃`: `[[I + M₁M₂, M₃ + M₁M₂M₃ + M₁], [M₂, M₂M₃ + I]]`.
struct L3Blocks {
    m1: DMatrix<f64>,
    m2: DMatrix<f64>,
    m3: DMatrix<f64>,
    /// M₁M₂
    m1m2: DMatrix<f64>,
    /// M₂M₃
    m2m3: DMatrix<f64>,
    l11: DMatrix<f64>,
    l12: DMatrix<f64>,
    l22: DMatrix<f64>,
}

fn l3_blocks(f: &TriangularFactors) -> Result<L3Blocks> {
    if f.mode() == FactorMode::Gap {
        return Err(Error::Config("L₃ needs a full M₁; gap-mode factors only carry m₁".into()));
    }
    let d = f.modes();
    let (m1, m2, m3) = (f.m1_matrix(), f.m2_matrix(), f.m3_matrix());
    let id = DMatrix::<f64>::identity(d, d);
    let m1m2 = mul(&m1, &m2);
    let m2m3 = mul(&m2, &m3);
    let l11 = &id + &m1m2;
    let l22 = &m2m3 + &id;
    // M₃ + M₁M₂M₃ + M₁ = M₃ + M₁(M₂M₃ + I)
    let l12 = &m3 + mul(&m1, &l22);
    Ok(L3Blocks { m1, m2, m3, m1m2, m2m3, l11, l12, l22 })
}

fn assemble(b: &L3Blocks) -> DMatrix<f64> {
    let d = b.m1.nrows();
    let mut l = DMatrix::zeros(2 * d, 2 * d);
    l.view_mut((0, 0), (d, d)).copy_from(&b.l11);
    l.view_mut((0, d), (d, d)).copy_from(&b.l12);
    l.view_mut((d, 0), (d, d)).copy_from(&b.m2);
    l.view_mut((d, d), (d, d)).copy_from(&b.l22);
    l
}

/// `L₃` from its closed block form.
pub fn build_l3(f: &TriangularFactors) -> Result<DMatrix<f64>> {
    Ok(assemble(&l3_blocks(f)?))
}

/// Pure-state covariance `γ = L₃ᵀL₃`.
pub fn covariance(f: &TriangularFactors) -> Result<DMatrix<f64>> {
    let l = build_l3(f)?;
    let g = l.tr_mul(&l);
    Ok((&g + g.transpose()) * 0.5)
}

fn check_dims(f: &TriangularFactors, h: &QuadraticHamiltonian) -> Result<()> {
    if f.modes() != h.modes() {
        return Err(Error::Dimension(format!(
            "factors have d = {}, Hamiltonian has d = {}",
            f.modes(),
            h.modes()
        )));
    }
    Ok(())
}

/// `¼ tr(L₃ H L₃ᵀ)`, using the block-diagonal route when `H = V ⊕ I`.
pub fn energy_cost(f: &TriangularFactors, h: &QuadraticHamiltonian) -> Result<f64> {
    check_dims(f, h)?;
    let b = l3_blocks(f)?;
    match h.block_v() {
        Some(v) => Ok(block_cost(&b, v).0),
        None => {
            let l = assemble(&b);
            let k = mul(&l, h.matrix());
            Ok(0.25 * frob_dot(&k, &l))
        }
    }
}

/// Cost and gradients together, dispatching on the Hamiltonian structure.
pub fn energy_cost_grad(
    f: &TriangularFactors,
    h: &QuadraticHamiltonian,
) -> Result<(f64, FactorGradient)> {
    check_dims(f, h)?;
    let b = l3_blocks(f)?;
    match h.block_v() {
        Some(v) => Ok(block_cost_grad(&b, v)),
        None => Ok(generic_cost_grad(&b, h.matrix())),
    }
}

pub fn energy_grad(f: &TriangularFactors, h: &QuadraticHamiltonian) -> Result<FactorGradient> {
    Ok(energy_cost_grad(f, h)?.1)
}

/// Gradients through the full `2d × 2d` product `K = L₃H`, for any `H`.
pub fn energy_grad_generic(
    f: &TriangularFactors,
    h: &QuadraticHamiltonian,
) -> Result<FactorGradient> {
    check_dims(f, h)?;
    Ok(generic_cost_grad(&l3_blocks(f)?, h.matrix()).1)
}

/// Gradients using `d × d` products only; requires `H = V ⊕ I`.
pub fn energy_grad_block(
    f: &TriangularFactors,
    h: &QuadraticHamiltonian,
) -> Result<FactorGradient> {
    check_dims(f, h)?;
    let v = h
        .block_v()
        .ok_or_else(|| Error::Config("block-diagonal gradient needs H = V ⊕ I".into()))?;
    Ok(block_cost_grad(&l3_blocks(f)?, v).1)
}

fn generic_cost_grad(b: &L3Blocks, h: &DMatrix<f64>) -> (f64, FactorGradient) {
    let d = b.m1.nrows();
    let l = assemble(b);
    let k = mul(&l, h);
    let cost = 0.25 * frob_dot(&k, &l);

    // Πₐᵀ K Π_b
    let blk = |r: usize, c: usize| k.view((r * d, c * d), (d, d)).into_owned();
    let (k11, k12, k21, k22) = (blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1));
    let id = DMatrix::<f64>::identity(d, d);
    let (m1, m2, m3) = (&b.m1, &b.m2, &b.m3);

    // Π₁ᵀKΠ₂ M₃M₂ + Π₁ᵀKΠ₂ + Π₁ᵀKΠ₁ M₂
    let m3m2 = b.m2m3.transpose();
    let g1 = mul(&k12, &m3m2) + &k12 + mul(&k11, m2);
    // M₁Π₁ᵀKΠ₂M₃ + M₁Π₁ᵀKΠ₁ + Π₂ᵀKΠ₂M₃ + Π₂ᵀKΠ₁
    let g2 = mul(m1, &(mul(&k12, m3) + &k11)) + mul(&k22, m3) + &k21;
    // M₂M₁Π₁ᵀKΠ₂ + Π₁ᵀKΠ₂ + M₂Π₂ᵀKΠ₂
    let m2m1 = b.m1m2.transpose();
    let g3 = mul(&(&id + m2m1), &k12) + mul(m2, &k22);

    (cost, FactorGradient { g1: g1 * 0.5, g2: g2 * 0.5, g3: g3 * 0.5 })
}

fn block_cost(b: &L3Blocks, v: &DMatrix<f64>) -> (f64, DMatrix<f64>, DMatrix<f64>) {
    // K₁₁ = (I + M₁M₂)V, K₂₁ = M₂V; the momentum blocks of K equal those of L₃.
    let k11 = mul(&b.l11, v);
    let k21 = mul(&b.m2, v);
    let cost = 0.25
        * (frob_dot(&k11, &b.l11)
            + frob_dot(&b.l12, &b.l12)
            + frob_dot(&k21, &b.m2)
            + frob_dot(&b.l22, &b.l22));
    (cost, k11, k21)
}

fn block_cost_grad(b: &L3Blocks, v: &DMatrix<f64>) -> (f64, FactorGradient) {
    let d = b.m1.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let (cost, k11, k21) = block_cost(b, v);
    let (m1, m2, m3) = (&b.m1, &b.m2, &b.m3);
    let upper = &b.l12; // M₃ + M₁M₂M₃ + M₁
    let lower = &b.l22; // M₂M₃ + I

    // (M₃ + M₁M₂M₃ + M₁)(I + M₃M₂) + (I + M₁M₂)VM₂
    let g1 = mul(upper, &(&id + b.m2m3.transpose())) + mul(&k11, m2);
    // M₁((M₃ + M₁M₂M₃ + M₁)M₃ + (I + M₁M₂)V) + (M₂M₃ + I)M₃ + M₂V
    let g2 = mul(m1, &(mul(upper, m3) + &k11)) + mul(lower, m3) + &k21;
    // (I + M₂M₁)(M₃ + M₁M₂M₃ + M₁) + M₂(M₂M₃ + I)
    let g3 = mul(&(&id + b.m1m2.transpose()), upper) + mul(m2, lower);

    (cost, FactorGradient { g1: g1 * 0.5, g2: g2 * 0.5, g3: g3 * 0.5 })
}
