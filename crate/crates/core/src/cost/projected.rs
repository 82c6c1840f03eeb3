//! Projected costs `¼ tr(P_k L₃ H L₃ᵀ P_kᵀ)` for the spectral gap (`k = 1`)
//! and partial symplectic sums.
//!
//! Only the `2k × 2d` slab `R = P_k L₃` is ever formed, so one evaluation
//! costs `O(k d²)`:
//!
//! ```text
//! R = [[E + R₁M₂, (E + R₁M₂)M₃ + R₁],
//!      [E M₂,     E M₂M₃ + E       ]]
//! ```
//!
//! with `E` the first `k` rows of `I_d` and `R₁ = E M₁`.

use nalgebra::DMatrix;

use super::factors::{FactorGradient, FactorMode, TriangularFactors};
use crate::error::{Error, Result};
use crate::gaussian::{symplectic_eigenvalues, SymplecticSpectrum};
use crate::hamiltonian::{QuadraticHamiltonian, Structure};
use crate::ops::{frob_dot, mul, tr_mul};

/// `R = P_k L₃` split into position and momentum column blocks, plus the
/// pieces of `M` the gradients reuse.
struct Slab {
    k: usize,
    r1: DMatrix<f64>,
    m2: DMatrix<f64>,
    m3: DMatrix<f64>,
    top_x: DMatrix<f64>,
    top_p: DMatrix<f64>,
    bot_x: DMatrix<f64>,
    bot_p: DMatrix<f64>,
}

/// `B = R H`, same layout as [`Slab`].
struct SlabProduct {
    top_x: DMatrix<f64>,
    top_p: DMatrix<f64>,
    bot_x: DMatrix<f64>,
    bot_p: DMatrix<f64>,
}

fn subspace(f: &TriangularFactors, h: &QuadraticHamiltonian, k: usize) -> Result<()> {
    let d = f.modes();
    if d != h.modes() {
        return Err(Error::Dimension(format!(
            "factors have d = {d}, Hamiltonian has d = {}",
            h.modes()
        )));
    }
    if k == 0 || k > d {
        return Err(Error::SubspaceOutOfRange { k, d });
    }
    if f.mode() == FactorMode::Gap && k != 1 {
        return Err(Error::Config(format!("gap-mode factors only support k = 1, got {k}")));
    }
    Ok(())
}

fn add_leading_identity(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        m[(i, i)] += 1.0;
    }
}

fn slab(f: &TriangularFactors, k: usize) -> Slab {
    let r1 = f.m1_rows(k);
    let m2 = f.m2_matrix();
    let m3 = f.m3_matrix();
    let mut top_x = mul(&r1, &m2);
    add_leading_identity(&mut top_x);
    let top_p = mul(&top_x, &m3) + &r1;
    let bot_x = m2.rows(0, k).into_owned();
    let mut bot_p = mul(&bot_x, &m3);
    add_leading_identity(&mut bot_p);
    Slab { k, r1, m2, m3, top_x, top_p, bot_x, bot_p }
}

fn apply_h(s: &Slab, h: &QuadraticHamiltonian) -> SlabProduct {
    let d = h.modes();
    match h.structure() {
        Structure::BlockDiagonal { v } => SlabProduct {
            top_x: mul(&s.top_x, v),
            top_p: s.top_p.clone(),
            bot_x: mul(&s.bot_x, v),
            bot_p: s.bot_p.clone(),
        },
        Structure::PmCoupled { v, c } => SlabProduct {
            top_x: mul(&s.top_x, v) + &s.top_p * *c,
            top_p: &s.top_x * *c + &s.top_p,
            bot_x: mul(&s.bot_x, v) + &s.bot_p * *c,
            bot_p: &s.bot_x * *c + &s.bot_p,
        },
        Structure::Generic => {
            let hm = h.matrix();
            let hx = hm.columns(0, d).into_owned();
            let hp = hm.columns(d, d).into_owned();
            // [a_x a_p] H = a_x H_xx + a_p H_px, etc., using row blocks of the
            // column slices
            let row_split = |a_x: &DMatrix<f64>, a_p: &DMatrix<f64>, cols: &DMatrix<f64>| {
                mul(a_x, &cols.rows(0, d).into_owned()) + mul(a_p, &cols.rows(d, d).into_owned())
            };
            SlabProduct {
                top_x: row_split(&s.top_x, &s.top_p, &hx),
                top_p: row_split(&s.top_x, &s.top_p, &hp),
                bot_x: row_split(&s.bot_x, &s.bot_p, &hx),
                bot_p: row_split(&s.bot_x, &s.bot_p, &hp),
            }
        }
    }
}

fn slab_cost(s: &Slab, b: &SlabProduct) -> f64 {
    0.25 * (frob_dot(&b.top_x, &s.top_x)
        + frob_dot(&b.top_p, &s.top_p)
        + frob_dot(&b.bot_x, &s.bot_x)
        + frob_dot(&b.bot_p, &s.bot_p))
}

/// `¼ tr(P_k L₃ H L₃ᵀ P_kᵀ)`
pub fn partial_cost(f: &TriangularFactors, h: &QuadraticHamiltonian, k: usize) -> Result<f64> {
    subspace(f, h, k)?;
    let s = slab(f, k);
    Ok(slab_cost(&s, &apply_h(&s, h)))
}

/// `¼ tr(P₁ L₃ H L₃ᵀ P₁ᵀ)` on gap-mode factors.
pub fn gap_cost(f: &TriangularFactors, h: &QuadraticHamiltonian) -> Result<f64> {
    partial_cost(f, h, 1)
}

/// Cost and gradients for any `k`, using the `K = P_kᵀ P_k L₃ H` form of the
/// energy gradients restricted to the `k` live rows.
pub fn partial_cost_grad(
    f: &TriangularFactors,
    h: &QuadraticHamiltonian,
    k: usize,
) -> Result<(f64, FactorGradient)> {
    subspace(f, h, k)?;
    let d = f.modes();
    let s = slab(f, k);
    let b = apply_h(&s, h);
    let cost = slab_cost(&s, &b);

    // rows of M₁: Tₓ M₂ + T_p M₃M₂ + T_p
    let g1_rows = mul(&(mul(&b.top_p, &s.m3) + &b.top_x), &s.m2) + &b.top_p;
    // M₂: R₁ᵀ(Tₓ + T_p M₃) + Eᵀ(Bₓ + B_p M₃)
    let mut g2 = tr_mul(&s.r1, &(mul(&b.top_p, &s.m3) + &b.top_x));
    let lead2 = mul(&b.bot_p, &s.m3) + &b.bot_x;
    g2.rows_mut(0, k).zip_apply(&lead2, |a, b| *a += b);
    // M₃: (Eᵀ + M₂R₁ᵀ) T_p + M₂Eᵀ B_p
    let m2_r1t = mul(&s.m2, &s.r1.transpose());
    let m2_et = s.m2.columns(0, k).into_owned();
    let mut g3 = mul(&m2_r1t, &b.top_p) + mul(&m2_et, &b.bot_p);
    g3.rows_mut(0, k).zip_apply(&b.top_p, |a, b| *a += b);

    let g1 = match f.mode() {
        FactorMode::Gap => g1_rows,
        _ => {
            let mut full = DMatrix::zeros(d, d);
            full.rows_mut(0, k).copy_from(&g1_rows);
            full
        }
    };
    Ok((cost, FactorGradient { g1: g1 * 0.5, g2: g2 * 0.5, g3: g3 * 0.5 }))
}

/// Gap gradients as outer products of the rows of `A = P₁ᵀ B`, `B = P₁L₃H`:
///
/// ```text
/// ∇m₁ = e₁ᵀAΠ₂M₃M₂ + e₁ᵀAΠ₂ + e₁ᵀAΠ₁M₂
/// ∇M₂ = m₁ ⊗ (e₁ᵀAΠ₂M₃ + e₁ᵀAΠ₁) + ê₁ ⊗ (e₂ᵀAΠ₁ + e₂ᵀAΠ₂M₃)
/// ∇M₃ = M₂m₁ ⊗ e₁ᵀAΠ₂ + M₂ê₁ ⊗ e₂ᵀAΠ₂ + ê₁ ⊗ e₁ᵀAΠ₂
/// ```
///
/// each halved to give the true derivative.
pub fn gap_grad(f: &TriangularFactors, h: &QuadraticHamiltonian) -> Result<FactorGradient> {
    if f.mode() != FactorMode::Gap {
        return Err(Error::Config("gap_grad expects gap-mode factors".into()));
    }
    subspace(f, h, 1)?;
    let d = f.modes();
    let s = slab(f, 1);
    let b = apply_h(&s, h);
    // e₁ᵀAΠ₁, e₁ᵀAΠ₂, e₂ᵀAΠ₁, e₂ᵀAΠ₂ are the rows of B
    let (a1x, a1p, a2x, a2p) = (&b.top_x, &b.top_p, &b.bot_x, &b.bot_p);
    let m1 = s.r1.transpose(); // column vector
    let unit = DMatrix::from_fn(d, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let outer = |u: &DMatrix<f64>, w: &DMatrix<f64>| u * w;

    let g1 = mul(&mul(a1p, &s.m3), &s.m2) + a1p + mul(a1x, &s.m2);
    let g2 = outer(&m1, &(mul(a1p, &s.m3) + a1x)) + outer(&unit, &(a2x + mul(a2p, &s.m3)));
    let m2_first_row = s.m2.rows(0, 1).transpose();
    let g3 = outer(&mul(&s.m2, &m1), a1p) + outer(&m2_first_row, a2p) + outer(&unit, a1p);
    Ok(FactorGradient { g1: g1 * 0.5, g2: g2 * 0.5, g3: g3 * 0.5 })
}

/// The `2k × 2d` rectangular symplectic matrix `P_k L₃`.
pub fn projected_factor(f: &TriangularFactors, k: usize) -> Result<DMatrix<f64>> {
    let d = f.modes();
    if k == 0 || k > d {
        return Err(Error::SubspaceOutOfRange { k, d });
    }
    if f.mode() == FactorMode::Gap && k != 1 {
        return Err(Error::Config("gap-mode factors only support k = 1".into()));
    }
    let s = slab(f, k);
    let mut r = DMatrix::zeros(2 * k, 2 * d);
    r.view_mut((0, 0), (k, d)).copy_from(&s.top_x);
    r.view_mut((0, d), (k, d)).copy_from(&s.top_p);
    r.view_mut((k, 0), (k, d)).copy_from(&s.bot_x);
    r.view_mut((k, d), (k, d)).copy_from(&s.bot_p);
    debug_assert_eq!(s.k, k);
    Ok(r)
}

/// Symplectic spectrum of the compressed `2k × 2k` matrix `R H Rᵀ`.
pub fn projected_spectrum(
    f: &TriangularFactors,
    h: &QuadraticHamiltonian,
    k: usize,
) -> Result<SymplecticSpectrum> {
    subspace(f, h, k)?;
    let r = projected_factor(f, k)?;
    let c = &r * h.matrix() * r.transpose();
    symplectic_eigenvalues(&((&c + c.transpose()) * 0.5))
}

/// The trace bound is `¼tr = ½ Σ_{i≤k} ε↑ᵢ` at the infimum, so twice the
/// converged cost estimates the partial sum (the gap itself for `k = 1`).
pub fn gap_estimate(converged_cost: f64) -> f64 {
    2.0 * converged_cost
}

pub fn partial_sum_estimate(converged_cost: f64) -> f64 {
    2.0 * converged_cost
}

/// Individual eigenvalue estimates from consecutive partial sums
/// `S₁, S₂, …`: `ε̂₁ = S₁`, `ε̂ᵢ = Sᵢ − Sᵢ₋₁`.
pub fn successive_differences(sums: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    sums.iter()
        .map(|&s| {
            let e = s - prev;
            prev = s;
            e
        })
        .collect()
}
