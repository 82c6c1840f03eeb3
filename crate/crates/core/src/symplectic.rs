//! Symplectic form, basis projectors, the `P_k` row selector and the
//! upper-triangular parameterization of symmetric matrices.
//!
//! Quadratures are ordered `(x₁..x_d, p₁..p_d)` everywhere in the crate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default tolerance for structural checks (symplecticity, symmetry).
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// The canonical form `σ = [[0, I], [−I, 0]]` on `d` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    d: usize,
}

impl SymplecticForm {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("mode count must be positive".into()));
        }
        Ok(Self { d })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(2 * d, 2 * d, |i, j| {
            if i < d && j == i + d {
                1.0
            } else if i >= d && j + d == i {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `σ a` without forming σ: rows are permuted and negated.
    pub fn left_apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.d;
        assert_eq!(a.nrows(), 2 * d);
        DMatrix::from_fn(2 * d, a.ncols(), |i, j| {
            if i < d {
                a[(i + d, j)]
            } else {
                -a[(i - d, j)]
            }
        })
    }

    /// `a σ` without forming σ.
    pub fn right_apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.d;
        assert_eq!(a.ncols(), 2 * d);
        DMatrix::from_fn(a.nrows(), 2 * d, |i, j| {
            if j < d {
                -a[(i, j + d)]
            } else {
                a[(i, j - d)]
            }
        })
    }
}

pub fn build_sigma(d: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(d)
}

/// `Π₁ = [I; 0]` and `Π₂ = [0; I]`, kept as block selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisProjectors {
    d: usize,
}

impl BasisProjectors {
    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn pi1(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(2 * d, d, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn pi2(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(2 * d, d, |i, j| if i == j + d { 1.0 } else { 0.0 })
    }

    /// `Π_aᵀ m Π_b` for a, b ∈ {1, 2}, read straight out of `m`.
    pub fn block(&self, m: &DMatrix<f64>, a: usize, b: usize) -> DMatrix<f64> {
        let d = self.d;
        let r = if a == 1 { 0 } else { d };
        let c = if b == 1 { 0 } else { d };
        m.view((r, c), (d, d)).into_owned()
    }
}

pub fn build_projectors(d: usize) -> Result<BasisProjectors> {
    if d == 0 {
        return Err(Error::Dimension("mode count must be positive".into()));
    }
    Ok(BasisProjectors { d })
}

/// `P_k`: keeps the first `k` position rows and the first `k` momentum rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceProjector {
    d: usize,
    k: usize,
}

impl SubspaceProjector {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("mode count must be positive".into()));
        }
        if k == 0 || k > d {
            return Err(Error::SubspaceOutOfRange { k, d });
        }
        Ok(Self { d, k })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    /// Row indices of the 2d-dimensional phase space that survive the projection.
    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).chain(self.d..self.d + self.k)
    }

    /// `P_k m` as a row gather.
    pub fn select_rows(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), 2 * self.d);
        let rows: Vec<usize> = self.rows().collect();
        m.select_rows(rows.iter())
    }

    /// `m P_kᵀ` as a column gather.
    pub fn select_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.ncols(), 2 * self.d);
        let cols: Vec<usize> = self.rows().collect();
        m.select_columns(cols.iter())
    }

    /// Dense `P_k`, for checks only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let rows: Vec<usize> = self.rows().collect();
        DMatrix::from_fn(2 * self.k, 2 * self.d, |i, j| if rows[i] == j { 1.0 } else { 0.0 })
    }
}

pub fn build_pk(d: usize, k: usize) -> Result<SubspaceProjector> {
    SubspaceProjector::new(d, k)
}

/// Checks `‖S σ_{2d} Sᵀ − σ_{2k}‖_F ≤ tol` for a `2k × 2d` matrix `S`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(s)? <= tol)
}

pub fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    let (r, c) = s.shape();
    if r % 2 != 0 || c % 2 != 0 || r == 0 || c == 0 {
        return Err(Error::Dimension(format!(
            "symplectic check needs even dimensions, got {r}×{c}"
        )));
    }
    let big = SymplecticForm::new(c / 2)?;
    let small = SymplecticForm::new(r / 2)?;
    let lhs = big.right_apply(s) * s.transpose();
    Ok((lhs - small.matrix()).norm())
}

/// A symmetric `d × d` matrix stored as the `d(d+1)/2` entries of an
/// unconstrained upper-triangular `X`, packed row by row. The symmetric matrix
/// is `M = triu(X) + triu(X)ᵀ`, so `M_ii = 2 X_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricParam {
    d: usize,
    x: Vec<f64>,
}

pub const fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

impl SymmetricParam {
    pub fn zeros(d: usize) -> Self {
        Self { d, x: vec![0.0; packed_len(d)] }
    }

    pub fn from_packed(d: usize, x: Vec<f64>) -> Result<Self> {
        if x.len() != packed_len(d) {
            return Err(Error::Dimension(format!(
                "expected {} packed parameters for d = {d}, got {}",
                packed_len(d),
                x.len()
            )));
        }
        Ok(Self { d, x })
    }

    /// Reads `triu(X)` out of a full matrix; entries below the diagonal are ignored.
    pub fn from_upper(x: &DMatrix<f64>) -> Result<Self> {
        let d = x.nrows();
        if x.ncols() != d {
            return Err(Error::Dimension("upper-triangular parameter must be square".into()));
        }
        let mut packed = Vec::with_capacity(packed_len(d));
        for i in 0..d {
            for j in i..d {
                packed.push(x[(i, j)]);
            }
        }
        Ok(Self { d, x: packed })
    }

    /// Inverse of [`materialize_symmetric`] for a symmetric `m`:
    /// `X_ii = M_ii / 2`, `X_ij = M_ij` above the diagonal.
    pub fn from_symmetric(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::Dimension("symmetric matrix must be square".into()));
        }
        let mut packed = Vec::with_capacity(packed_len(d));
        for i in 0..d {
            packed.push(0.5 * m[(i, i)]);
            for j in i + 1..d {
                packed.push(m[(i, j)]);
            }
        }
        Ok(Self { d, x: packed })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn packed(&self) -> &[f64] {
        &self.x
    }

    pub fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }
}

pub fn materialize_symmetric(p: &SymmetricParam) -> DMatrix<f64> {
    let d = p.d;
    let mut m = DMatrix::zeros(d, d);
    let mut it = p.x.iter();
    for i in 0..d {
        for j in i..d {
            let v = *it.next().unwrap();
            if i == j {
                m[(i, i)] = v + v;
            } else {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    m
}

/// Chain rule through `M = triu(X) + triu(X)ᵀ`: slot `(i, j)` with `i < j`
/// receives `G_ij + G_ji`, the diagonal slot receives `2 G_ii`.
pub fn chain_gradient_to_params(g: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::Dimension(format!(
            "gradient must be square, got {}×{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let mut out = Vec::with_capacity(packed_len(d));
    for i in 0..d {
        out.push(2.0 * g[(i, i)]);
        for j in i + 1..d {
            out.push(g[(i, j)] + g[(j, i)]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn zero_params_give_zero_matrix() {
        let m = materialize_symmetric(&SymmetricParam::zeros(3));
        assert_eq!(m, DMatrix::zeros(3, 3));
    }

    #[test]
    fn identity_param_doubles_diagonal() {
        let p = SymmetricParam::from_upper(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(materialize_symmetric(&p), DMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn single_off_diagonal_symmetrizes() {
        let p = SymmetricParam::from_upper(&dmatrix![0.0, 0.5; 0.0, 0.0]).unwrap();
        assert_eq!(materialize_symmetric(&p), dmatrix![0.0, 0.5; 0.5, 0.0]);
    }

    #[test]
    fn lower_triangle_of_x_is_ignored() {
        let p = SymmetricParam::from_upper(&dmatrix![1.0, 2.0; 7.0, 3.0]).unwrap();
        assert_eq!(materialize_symmetric(&p), dmatrix![2.0, 2.0; 2.0, 6.0]);
    }

    #[test]
    fn from_symmetric_inverts_materialize() {
        let m = dmatrix![0.3, -1.0, 2.0; -1.0, 4.0, 0.25; 2.0, 0.25, -7.5];
        let p = SymmetricParam::from_symmetric(&m).unwrap();
        assert_eq!(materialize_symmetric(&p), m);
    }

    #[test]
    fn chain_identity() {
        let g = chain_gradient_to_params(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(g, vec![2.0, 0.0, 2.0]);
    }

    #[test]
    fn chain_transpose_sum() {
        let g = chain_gradient_to_params(&dmatrix![0.0, 1.0; 0.0, 0.0]).unwrap();
        assert_eq!(g, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn chain_rejects_rectangular() {
        assert!(chain_gradient_to_params(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn sigma_d1() {
        let s = build_sigma(1).unwrap().matrix();
        assert_eq!(s, dmatrix![0.0, 1.0; -1.0, 0.0]);
    }

    #[test]
    fn sigma_squares_to_minus_identity() {
        for d in 1..6 {
            let s = build_sigma(d).unwrap().matrix();
            assert_eq!(&s * &s, -DMatrix::identity(2 * d, 2 * d));
            assert_eq!(s.transpose(), -&s);
        }
    }

    #[test]
    fn sigma_apply_matches_dense() {
        let f = build_sigma(3).unwrap();
        let a = DMatrix::from_fn(6, 4, |i, j| (i * 4 + j) as f64 - 7.0);
        assert_eq!(f.left_apply(&a), f.matrix() * &a);
        let b = a.transpose();
        assert_eq!(f.right_apply(&b), &b * f.matrix());
    }

    #[test]
    fn basis_projectors_orthonormal() {
        let p = build_projectors(4).unwrap();
        let (p1, p2) = (p.pi1(), p.pi2());
        assert_eq!(p1.transpose() * &p1, DMatrix::identity(4, 4));
        assert_eq!(p2.transpose() * &p2, DMatrix::identity(4, 4));
        assert_eq!(p1.transpose() * &p2, DMatrix::zeros(4, 4));
        let m = DMatrix::from_fn(8, 8, |i, j| (i * 8 + j) as f64);
        assert_eq!(p.block(&m, 1, 2), p1.transpose() * &m * &p2);
        assert_eq!(p.block(&m, 2, 1), p2.transpose() * &m * &p1);
    }

    #[test]
    fn p1_selects_first_position_and_momentum() {
        let p = build_pk(2, 1).unwrap();
        let v = DMatrix::from_column_slice(4, 1, &[10.0, 20.0, 30.0, 40.0]);
        assert_eq!(p.select_rows(&v).as_slice(), &[10.0, 30.0]);
        assert_eq!(p.to_dense(), dmatrix![1.0, 0.0, 0.0, 0.0; 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn pk_maps_sigma6_to_sigma4() {
        let p = build_pk(3, 2).unwrap().to_dense();
        let s6 = build_sigma(3).unwrap().matrix();
        let s4 = build_sigma(2).unwrap().matrix();
        assert_eq!(&p * s6 * p.transpose(), s4);
        assert_eq!(&p * p.transpose(), DMatrix::identity(4, 4));
    }

    #[test]
    fn pk_out_of_range() {
        assert!(matches!(build_pk(3, 0), Err(Error::SubspaceOutOfRange { .. })));
        assert!(matches!(build_pk(3, 4), Err(Error::SubspaceOutOfRange { .. })));
    }

    #[test]
    fn symplectic_checks() {
        let d = 3;
        assert!(is_symplectic(&DMatrix::identity(2 * d, 2 * d), 1e-12).unwrap());
        assert!(!is_symplectic(&(DMatrix::identity(2 * d, 2 * d) * 2.0), 1e-12).unwrap());

        let sym = dmatrix![1.0, 2.0, 0.5; 2.0, -1.0, 0.0; 0.5, 0.0, 3.0];
        let asym = dmatrix![1.0, 2.0, 0.5; 0.0, -1.0, 0.0; 0.5, 0.0, 3.0];
        let shear = |m: &DMatrix<f64>| {
            let mut s = DMatrix::identity(2 * d, 2 * d);
            s.view_mut((0, d), (d, d)).copy_from(m);
            s
        };
        assert!(is_symplectic(&shear(&sym), 1e-12).unwrap());
        assert!(!is_symplectic(&shear(&asym), 1e-12).unwrap());
    }

    #[test]
    fn symplectic_rejects_odd_dimensions() {
        assert!(is_symplectic(&DMatrix::identity(3, 3), 1e-10).is_err());
    }
}
