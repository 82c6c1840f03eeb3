//! Quadratic bosonic Hamiltonians `Ĥ = ½ q̂ᵀ H q̂` and the dipole-coupled
//! Drude-oscillator lattices used as benchmarks.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfile;

/// Open-boundary lattice of identical three-mode Drude oscillators.
///
/// `dims` are the extents along x, y, z (one to three entries); sites sit on
/// integer grid points and `rho` enters only as the `ρ⁻³` prefactor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dims: Vec<usize>,
    pub rho: f64,
    #[serde(default)]
    pub coupling_c: f64,
}

impl LatticeSpec {
    pub fn new(dims: &[usize], rho: f64) -> Self {
        Self { dims: dims.to_vec(), rho, coupling_c: 0.0 }
    }

    pub fn with_coupling(mut self, c: f64) -> Self {
        self.coupling_c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.len() > 3 {
            return Err(Error::Config(format!(
                "lattice needs 1 to 3 extents, got {}",
                self.dims.len()
            )));
        }
        if self.dims.contains(&0) {
            return Err(Error::Config("lattice extents must be positive".into()));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if !self.coupling_c.is_finite() {
            return Err(Error::Config("coupling c must be finite".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn modes(&self) -> usize {
        3 * self.sites()
    }

    /// Site coordinates, x fastest.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let mut ext = [1usize; 3];
        ext[..self.dims.len()].copy_from_slice(&self.dims);
        let mut out = Vec::with_capacity(self.sites());
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                for x in 0..ext[0] {
                    out.push([x as f64, y as f64, z as f64]);
                }
            }
        }
        out
    }
}

/// Dipole tensor `T` for point dipoles at `sites`; block `(i, j)` is
/// `(I₃ − 3 n̂n̂ᵀ) / r³` for `i ≠ j`, diagonal blocks vanish.
pub fn dipole_matrix_for_sites(sites: &[[f64; 3]]) -> DMatrix<f64> {
    let n = sites.len();
    let mut t = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in i + 1..n {
            let r = [
                sites[j][0] - sites[i][0],
                sites[j][1] - sites[i][1],
                sites[j][2] - sites[i][2],
            ];
            let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            let inv3 = 1.0 / (dist * dist * dist);
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let v = (delta - 3.0 * r[a] * r[b] / (dist * dist)) * inv3;
                    t[(3 * i + a, 3 * j + b)] = v;
                    t[(3 * j + b, 3 * i + a)] = v;
                }
            }
        }
    }
    t
}

pub fn dipole_matrix(spec: &LatticeSpec) -> DMatrix<f64> {
    dipole_matrix_for_sites(&spec.positions())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    /// `H = V ⊕ I`
    BlockDiagonal { v: DMatrix<f64> },
    /// `H = [[V, cI], [cI, I]]`
    PmCoupled { v: DMatrix<f64>, c: f64 },
    Generic,
}

/// Lattice provenance kept alongside QDO Hamiltonians; `interaction` is `ρ⁻³T`.
#[derive(Debug, Clone, PartialEq)]
pub struct QdoLattice {
    pub spec: LatticeSpec,
    pub interaction: DMatrix<f64>,
}

/// A symmetric positive-definite `2d × 2d` Hamiltonian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    d: usize,
    h: DMatrix<f64>,
    structure: Structure,
    lattice: Option<QdoLattice>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl QuadraticHamiltonian {
    /// Wraps an arbitrary matrix. Tiny asymmetry (relative Frobenius ≤ 1e−12)
    /// is averaged away; anything larger is rejected.
    pub fn generic(h: DMatrix<f64>) -> Result<Self> {
        let (r, c) = h.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(Error::Dimension(format!(
                "Hamiltonian must be square with even dimension, got {r}×{c}"
            )));
        }
        let h = symmetrize(h)?;
        check_spd(&h, "")?;
        Ok(Self { d: r / 2, h, structure: Structure::Generic, lattice: None })
    }

    /// `H = V ⊕ I` for symmetric positive-definite `V`.
    pub fn block_diagonal(v: DMatrix<f64>) -> Result<Self> {
        let d = v.nrows();
        if v.ncols() != d || d == 0 {
            return Err(Error::Dimension("V must be square and non-empty".into()));
        }
        let v = symmetrize(v)?;
        check_spd(&v, "")?;
        let mut h = DMatrix::identity(2 * d, 2 * d);
        h.view_mut((0, 0), (d, d)).copy_from(&v);
        Ok(Self { d, h, structure: Structure::BlockDiagonal { v }, lattice: None })
    }

    /// `H = [[V, cI], [cI, I]]`; `c = 0` yields the block-diagonal tag.
    pub fn pm_coupled(v: DMatrix<f64>, c: f64) -> Result<Self> {
        if c == 0.0 {
            return Self::block_diagonal(v);
        }
        let d = v.nrows();
        if v.ncols() != d || d == 0 {
            return Err(Error::Dimension("V must be square and non-empty".into()));
        }
        let v = symmetrize(v)?;
        let mut h = DMatrix::identity(2 * d, 2 * d);
        h.view_mut((0, 0), (d, d)).copy_from(&v);
        for i in 0..d {
            h[(i, i + d)] = c;
            h[(i + d, i)] = c;
        }
        check_spd(&h, "; try a larger rho or a smaller |c|")?;
        Ok(Self { d, h, structure: Structure::PmCoupled { v, c }, lattice: None })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn lattice(&self) -> Option<&QdoLattice> {
        self.lattice.as_ref()
    }

    /// `V` for the block-diagonal tag.
    pub fn block_v(&self) -> Option<&DMatrix<f64>> {
        match &self.structure {
            Structure::BlockDiagonal { v } => Some(v),
            _ => None,
        }
    }

    pub fn is_block_diagonal(&self) -> bool {
        matches!(self.structure, Structure::BlockDiagonal { .. })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        matfile::write_mat1(path, &self.h)
    }
}

fn symmetrize(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (&m - m.transpose()).norm();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if asym / scale > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym / scale));
    }
    if asym == 0.0 {
        return Ok(m);
    }
    Ok((&m + m.transpose()) * 0.5)
}

/// Cholesky first; the eigenvalue is only computed to report a failure.
fn check_spd(m: &DMatrix<f64>, hint: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("matrix has non-finite entries".into()));
    }
    if m.clone().cholesky().is_some() {
        return Ok(());
    }
    Err(Error::NotPositiveDefinite {
        min_eigenvalue: smallest_eigenvalue(m),
        hint: hint.to_string(),
    })
}

pub(crate) fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `V = I + ρ⁻³T`, then `V ⊕ I` or the position–momentum coupled form.
pub fn build_qdo(spec: &LatticeSpec) -> Result<QuadraticHamiltonian> {
    spec.validate()?;
    let interaction = dipole_matrix(spec) * spec.rho.powi(-3);
    let d = spec.modes();
    let v = DMatrix::identity(d, d) + &interaction;
    let hint = "; try a larger rho or a smaller |c|";
    let mut ham = if spec.coupling_c == 0.0 {
        QuadraticHamiltonian::block_diagonal(v).map_err(|e| add_hint(e, hint))?
    } else {
        QuadraticHamiltonian::pm_coupled(v, spec.coupling_c)?
    };
    ham.lattice = Some(QdoLattice { spec: spec.clone(), interaction });
    Ok(ham)
}

fn add_hint(e: Error, hint: &str) -> Error {
    match e {
        Error::NotPositiveDefinite { min_eigenvalue, .. } => {
            Error::NotPositiveDefinite { min_eigenvalue, hint: hint.to_string() }
        }
        other => other,
    }
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<QuadraticHamiltonian> {
    QuadraticHamiltonian::generic(matfile::read_mat1(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(t: &DMatrix<f64>, i: usize, j: usize) -> DMatrix<f64> {
        t.view((3 * i, 3 * j), (3, 3)).into_owned()
    }

    #[test]
    fn single_site_has_no_coupling() {
        let t = dipole_matrix(&LatticeSpec::new(&[1], 2.0));
        assert_eq!(t, DMatrix::zeros(3, 3));
        let h = build_qdo(&LatticeSpec::new(&[1], 0.7)).unwrap();
        assert_eq!(h.matrix(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn pair_along_z() {
        let t = dipole_matrix_for_sites(&[[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let expect = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, -2.0]);
        assert_eq!(block(&t, 0, 1), expect);
        assert_eq!(block(&t, 1, 0), expect);
        assert_eq!(block(&t, 0, 0), DMatrix::zeros(3, 3));
    }

    #[test]
    fn chain_decays_as_inverse_cube() {
        let t = dipole_matrix(&LatticeSpec::new(&[3], 1.0));
        assert_eq!(block(&t, 0, 2), block(&t, 0, 1) / 8.0);
        assert_eq!(block(&t, 0, 1), DMatrix::from_diagonal(&nalgebra::dvector![-2.0, 1.0, 1.0]));
    }

    #[test]
    fn dipole_matrix_symmetric_zero_diagonal() {
        let t = dipole_matrix(&LatticeSpec::new(&[2, 3, 2], 1.0));
        assert_eq!(t, t.transpose());
        for i in 0..12 {
            assert_eq!(block(&t, i, i), DMatrix::zeros(3, 3));
        }
    }

    #[test]
    fn cubic_333_dimensions() {
        let h = build_qdo(&LatticeSpec::new(&[3, 3, 3], 1.9)).unwrap();
        assert_eq!(h.modes(), 81);
        assert_eq!(h.matrix().shape(), (162, 162));
        assert!(h.is_block_diagonal());
        assert!(h.lattice().is_some());
    }

    #[test]
    fn square_2x2_has_twelve_modes() {
        let h = build_qdo(&LatticeSpec::new(&[2, 2], 2.0)).unwrap();
        assert_eq!(h.modes(), 12);
    }

    #[test]
    fn coupled_form_has_c_blocks() {
        let h = build_qdo(&LatticeSpec::new(&[2], 2.0).with_coupling(0.3)).unwrap();
        assert!(matches!(h.structure(), Structure::PmCoupled { .. }));
        let m = h.matrix();
        assert_eq!(m[(0, 6)], 0.3);
        assert_eq!(m[(6, 0)], 0.3);
        assert_eq!(m[(0, 7)], 0.0);
    }

    #[test]
    fn too_close_pair_is_rejected() {
        // longitudinal eigenvalue 1 − 2ρ⁻³ goes negative below ρ³ = 2
        let err = build_qdo(&LatticeSpec::new(&[2], 1.2)).unwrap_err();
        match err {
            Error::NotPositiveDefinite { min_eigenvalue, hint } => {
                assert!(min_eigenvalue < 0.0);
                assert!(hint.contains("rho"));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(build_qdo(&LatticeSpec::new(&[2], 1.3)).is_ok());
    }

    #[test]
    fn large_coupling_is_rejected() {
        assert!(build_qdo(&LatticeSpec::new(&[2], 2.0).with_coupling(1.5)).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(build_qdo(&LatticeSpec::new(&[], 2.0)).is_err());
        assert!(build_qdo(&LatticeSpec::new(&[1, 1, 1, 1], 2.0)).is_err());
        assert!(build_qdo(&LatticeSpec::new(&[0], 2.0)).is_err());
        assert!(build_qdo(&LatticeSpec::new(&[2], -1.0)).is_err());
    }

    #[test]
    fn generic_rejects_bad_input() {
        assert!(matches!(
            QuadraticHamiltonian::generic(DMatrix::identity(3, 3)),
            Err(Error::Dimension(_))
        ));
        let mut a = DMatrix::identity(4, 4);
        a[(0, 1)] = 0.1;
        assert!(matches!(QuadraticHamiltonian::generic(a), Err(Error::NotSymmetric(_))));
        let mut n = DMatrix::identity(4, 4);
        n[(2, 2)] = -1.0;
        assert!(matches!(
            QuadraticHamiltonian::generic(n),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.mat");
        let h = build_qdo(&LatticeSpec::new(&[2, 2], 2.0)).unwrap();
        h.save(&path).unwrap();
        let back = load_hamiltonian(&path).unwrap();
        assert_eq!(back.matrix(), h.matrix());
        assert!(matches!(back.structure(), Structure::Generic));

        let id = dir.path().join("id.mat");
        matfile::write_mat1(&id, &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(load_hamiltonian(&id).unwrap().modes(), 2);

        let bad = dir.path().join("neg.mat");
        let mut m = DMatrix::identity(4, 4);
        m[(1, 1)] = -2.0;
        matfile::write_mat1(&bad, &m).unwrap();
        let e = load_hamiltonian(&bad).unwrap_err();
        assert!(e.to_string().contains("not positive definite"));
    }
}
