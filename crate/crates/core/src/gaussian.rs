//! Covariance matrices of Gaussian states and the exact symplectic
//! diagonalization used as the reference for every optimized quantity.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{smallest_eigenvalue, QuadraticHamiltonian, Structure};
use crate::symplectic::SymplecticForm;

/// Default bound on `‖(γσ)² + I‖_F` for purity checks.
pub const PURITY_TOL: f64 = 1e-8;
/// Relative mismatch allowed between the two copies of each symplectic eigenvalue.
pub const PAIRING_TOL: f64 = 1e-8;
/// Eigenvalues of `V` below this are rejected when forming `V^{±1/2}`.
pub const SQRT_CLIP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    gamma: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Accepts a square, even-dimensional, numerically symmetric matrix and
    /// averages away rounding-level asymmetry.
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        let (r, c) = gamma.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square with even dimension, got {r}×{c}"
            )));
        }
        let asym = (&gamma - gamma.transpose()).norm() / gamma.norm().max(f64::MIN_POSITIVE);
        if asym > 1e-10 {
            return Err(Error::NotSymmetric(asym));
        }
        let gamma = (&gamma + gamma.transpose()) * 0.5;
        Ok(Self { gamma })
    }

    pub fn modes(&self) -> usize {
        self.gamma.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.gamma
    }

    /// Position block `Π₁ᵀγΠ₁`.
    pub fn position_block(&self) -> DMatrix<f64> {
        let d = self.modes();
        self.gamma.view((0, 0), (d, d)).into_owned()
    }

    /// Momentum block `Π₂ᵀγΠ₂`.
    pub fn momentum_block(&self) -> DMatrix<f64> {
        let d = self.modes();
        self.gamma.view((d, d), (d, d)).into_owned()
    }

    /// `¼ tr(γ H)`
    pub fn energy(&self, h: &DMatrix<f64>) -> f64 {
        0.25 * self.gamma.dot(h)
    }

    /// `log det γ` via Cholesky, `None` if γ is not positive definite.
    pub fn log_det(&self) -> Option<f64> {
        let chol = Cholesky::new(self.gamma.clone())?;
        Some(2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
    }

    /// `‖(γσ)² + I‖_F`
    pub fn purity_residual(&self) -> f64 {
        let d = self.modes();
        let gs = SymplecticForm::new(d).unwrap().right_apply(&self.gamma);
        (&gs * &gs + DMatrix::identity(2 * d, 2 * d)).norm()
    }

    /// Robertson–Schrödinger condition `γ + iσ ≥ 0`, checked on the real
    /// form `[[γ, −σ], [σ, γ]]`; eigenvalues down to `−tol·‖γ‖` are accepted.
    pub fn is_physical(&self, tol: f64) -> Result<bool> {
        let n = self.gamma.nrows();
        let d = n / 2;
        let sigma = SymplecticForm::new(d)?.matrix();
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.gamma);
        big.view_mut((n, n), (n, n)).copy_from(&self.gamma);
        big.view_mut((0, n), (n, n)).copy_from(&(-&sigma));
        big.view_mut((n, 0), (n, n)).copy_from(&sigma);
        let min = smallest_eigenvalue(&big);
        Ok(min >= -tol * self.gamma.norm().max(1.0))
    }
}

/// Symplectic eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub eps: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn from_unsorted(mut eps: Vec<f64>) -> Self {
        eps.sort_by(|a, b| a.total_cmp(b));
        Self { eps }
    }

    pub fn modes(&self) -> usize {
        self.eps.len()
    }

    /// Ground-state energy `½ Σ ε`.
    pub fn e0(&self) -> f64 {
        0.5 * self.eps.iter().sum::<f64>()
    }

    /// Spectral gap `min ε`.
    pub fn gap(&self) -> f64 {
        self.eps[0]
    }

    /// `Σ_{i≤k} ε↑ᵢ`
    pub fn partial_sum(&self, k: usize) -> f64 {
        self.eps[..k].iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,epsilon\n");
        for (i, e) in self.eps.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, crate::matfile::fmt_f64(*e)));
        }
        s
    }
}

/// Symplectic spectrum of `H`. Block-diagonal Hamiltonians reduce to the
/// ordinary eigenvalues of `V`, because `σHσᵀH = V ⊕ V` there; everything
/// else goes through [`symplectic_eigenvalues`].
pub fn symplectic_spectrum(h: &QuadraticHamiltonian) -> Result<SymplecticSpectrum> {
    match h.structure() {
        Structure::BlockDiagonal { v } => {
            let lambda = v.clone().symmetric_eigenvalues();
            if let Some(&min) = lambda.iter().min_by(|a, b| a.total_cmp(b)) {
                if !(min > 0.0) {
                    return Err(Error::NotPositiveDefinite { min_eigenvalue: min, hint: String::new() });
                }
            }
            Ok(SymplecticSpectrum::from_unsorted(lambda.iter().map(|l| l.sqrt()).collect()))
        }
        _ => symplectic_eigenvalues(h.matrix()),
    }
}

/// Symplectic eigenvalues of any symmetric positive-definite `A` of even
/// size. With `A = LLᵀ`, the antisymmetric `Lᵀσ L` is similar to a square
/// root of `σAσᵀA`, so its singular values are the `εᵢ`, each appearing
/// twice. The pair mismatch is the health check.
pub fn symplectic_eigenvalues(a: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let (r, c) = a.shape();
    if r != c || r % 2 != 0 || r == 0 {
        return Err(Error::Dimension(format!("expected a 2d×2d matrix, got {r}×{c}")));
    }
    let Some(chol) = Cholesky::new(a.clone()) else {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: smallest_eigenvalue(a),
            hint: String::new(),
        });
    };
    let d = r / 2;
    let sigma = SymplecticForm::new(d)?;
    let l = chol.l();
    let b = l.transpose() * sigma.left_apply(&l);
    let sv = b
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenSolver("singular value iteration did not converge".into()))?
        .singular_values;
    let mut roots: Vec<f64> = sv.iter().copied().collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut eps = Vec::with_capacity(d);
    for pair in roots.chunks_exact(2) {
        let rel = (pair[1] - pair[0]).abs() / pair[1];
        if !(rel <= PAIRING_TOL) {
            return Err(Error::Pairing(rel));
        }
        eps.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(SymplecticSpectrum { eps })
}

/// `V^{-1/2}` and `V^{1/2}` from one symmetric eigendecomposition.
pub fn inverse_and_sqrt(v: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = v.nrows();
    if v.ncols() != d || d == 0 {
        return Err(Error::Dimension("V must be square and non-empty".into()));
    }
    let eig = SymmetricEigen::new(v.clone());
    if let Some(&min) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < SQRT_CLIP {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min, hint: String::new() });
        }
    }
    let o = &eig.eigenvectors;
    let scaled = |f: fn(f64) -> f64| {
        let mut w = o.clone();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            w.column_mut(j).scale_mut(f(l));
        }
        let m = &w * o.transpose();
        (&m + m.transpose()) * 0.5
    };
    Ok((scaled(|l| 1.0 / l.sqrt()), scaled(f64::sqrt)))
}

/// Ground-state covariance `V^{-1/2} ⊕ V^{1/2}` of `H = V ⊕ I`.
pub fn block_diagonal_ground_cm(v: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let d = v.nrows();
    let (inv_sqrt, sqrt) = inverse_and_sqrt(v)?;
    let mut g = DMatrix::zeros(2 * d, 2 * d);
    g.view_mut((0, 0), (d, d)).copy_from(&inv_sqrt);
    g.view_mut((d, d), (d, d)).copy_from(&sqrt);
    CovarianceMatrix::new(g)
}

/// Pure iff positive definite and `‖(γσ)² + I‖_F ≤ tol`.
pub fn is_pure_cm(gamma: &CovarianceMatrix, tol: f64) -> bool {
    Cholesky::new(gamma.matrix().clone()).is_some() && gamma.purity_residual() <= tol
}

/// `γ = [[X, XY], [YX, YXY + X⁻¹]]` for `X > 0` and symmetric `Y`.
pub fn pure_cm_from_xy(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let d = x.nrows();
    if x.ncols() != d || y.shape() != (d, d) || d == 0 {
        return Err(Error::Dimension("X and Y must be square of the same size".into()));
    }
    let chol = Cholesky::new(x.clone()).ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: smallest_eigenvalue(x),
        hint: " (X block)".into(),
    })?;
    let x_inv = chol.inverse();
    let xy = x * y;
    let mut g = DMatrix::zeros(2 * d, 2 * d);
    g.view_mut((0, 0), (d, d)).copy_from(x);
    g.view_mut((0, d), (d, d)).copy_from(&xy);
    g.view_mut((d, 0), (d, d)).copy_from(&xy.transpose());
    g.view_mut((d, d), (d, d)).copy_from(&(y * &xy + x_inv));
    CovarianceMatrix::new(g)
}

/// Recovers `(X, Y)` with `γ = [[I,0],[Y,I]] (X ⊕ X⁻¹) [[I,Y],[0,I]]`.
pub fn spd_symplectic_factor(gamma: &CovarianceMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !is_pure_cm(gamma, PURITY_TOL) {
        return Err(Error::NotPure(gamma.purity_residual()));
    }
    let d = gamma.modes();
    let g = gamma.matrix();
    let x = g.view((0, 0), (d, d)).into_owned();
    let upper = g.view((0, d), (d, d)).into_owned();
    let chol = Cholesky::new(x.clone()).ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: smallest_eigenvalue(&x),
        hint: " (X block singular)".into(),
    })?;
    let y = chol.solve(&upper);
    let y = (&y + y.transpose()) * 0.5;
    Ok((x, y))
}
