use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::symplectic::{materialize_symmetric, packed_len, SymmetricParam};

/// Which cost the factors parameterize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    /// Full `¼ tr(L₃ H L₃ᵀ)`.
    Energy,
    /// `k = 1` projected cost with a free row `m₁` in place of `M₁`.
    Gap,
    /// `P_k` projected cost over full symmetric `M₁, M₂, M₃`.
    Partial(usize),
}

impl FactorMode {
    pub fn subspace(&self, d: usize) -> usize {
        match self {
            FactorMode::Energy => d,
            FactorMode::Gap => 1,
            FactorMode::Partial(k) => *k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FactorMode::Energy => "energy".into(),
            FactorMode::Gap => "gap".into(),
            FactorMode::Partial(k) => format!("partial:{k}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(FactorMode::Energy),
            "gap" => Ok(FactorMode::Gap),
            _ => s
                .strip_prefix("partial:")
                .and_then(|k| k.parse().ok())
                .map(FactorMode::Partial)
                .ok_or_else(|| Error::Config(format!("unknown factor mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FirstFactor {
    Symmetric(SymmetricParam),
    Row(Vec<f64>),
}

/// Variational state `(M₁, M₂, M₃)` of the unit-triangular product
/// `L₃ = [[I, M₁], [0, I]] [[I, 0], [M₂, I]] [[I, M₃], [0, I]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactors {
    d: usize,
    mode: FactorMode,
    m1: FirstFactor,
    m2: SymmetricParam,
    m3: SymmetricParam,
}

impl TriangularFactors {
    pub fn zeros(d: usize, mode: FactorMode) -> Result<Self> {
        check_mode(d, mode)?;
        let m1 = match mode {
            FactorMode::Gap => FirstFactor::Row(vec![0.0; d]),
            _ => FirstFactor::Symmetric(SymmetricParam::zeros(d)),
        };
        Ok(Self { d, mode, m1, m2: SymmetricParam::zeros(d), m3: SymmetricParam::zeros(d) })
    }

    /// Builds factors from materialized matrices. In gap mode `m1` is `1 × d`;
    /// otherwise all three are symmetric `d × d`.
    pub fn from_matrices(
        mode: FactorMode,
        m1: &DMatrix<f64>,
        m2: &DMatrix<f64>,
        m3: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = m2.nrows();
        check_mode(d, mode)?;
        if m2.shape() != (d, d) || m3.shape() != (d, d) {
            return Err(Error::Dimension("M₂ and M₃ must be d×d".into()));
        }
        for (name, m) in [("M₂", m2), ("M₃", m3)] {
            check_symmetric(name, m)?;
        }
        let first = match mode {
            FactorMode::Gap => {
                if m1.shape() != (1, d) {
                    return Err(Error::Dimension(format!(
                        "gap-mode m₁ must be 1×{d}, got {}×{}",
                        m1.nrows(),
                        m1.ncols()
                    )));
                }
                FirstFactor::Row(m1.iter().copied().collect())
            }
            _ => {
                if m1.shape() != (d, d) {
                    return Err(Error::Dimension("M₁ must be d×d".into()));
                }
                check_symmetric("M₁", m1)?;
                FirstFactor::Symmetric(SymmetricParam::from_symmetric(m1)?)
            }
        };
        Ok(Self {
            d,
            mode,
            m1: first,
            m2: SymmetricParam::from_symmetric(m2)?,
            m3: SymmetricParam::from_symmetric(m3)?,
        })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> FactorMode {
        self.mode
    }

    pub fn first(&self) -> &FirstFactor {
        &self.m1
    }

    fn m1_len(&self) -> usize {
        match self.mode {
            FactorMode::Gap => self.d,
            _ => packed_len(self.d),
        }
    }

    pub fn num_params(&self) -> usize {
        self.m1_len() + 2 * packed_len(self.d)
    }

    /// Flat parameter vector `[m₁ | X₂ | X₃]`.
    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        match &self.m1 {
            FirstFactor::Symmetric(p) => out.extend_from_slice(p.packed()),
            FirstFactor::Row(r) => out.extend_from_slice(r),
        }
        out.extend_from_slice(self.m2.packed());
        out.extend_from_slice(self.m3.packed());
        out
    }

    pub fn set_params(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_params() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                x.len()
            )));
        }
        let (a, rest) = x.split_at(self.m1_len());
        let (b, c) = rest.split_at(packed_len(self.d));
        match &mut self.m1 {
            FirstFactor::Symmetric(p) => p.packed_mut().copy_from_slice(a),
            FirstFactor::Row(r) => r.copy_from_slice(a),
        }
        self.m2.packed_mut().copy_from_slice(b);
        self.m3.packed_mut().copy_from_slice(c);
        Ok(())
    }

    pub fn with_params(&self, x: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_params(x)?;
        Ok(out)
    }

    /// `M₁` as a `d × d` symmetric matrix, or the `1 × d` row in gap mode.
    pub fn m1_matrix(&self) -> DMatrix<f64> {
        match &self.m1 {
            FirstFactor::Symmetric(p) => materialize_symmetric(p),
            FirstFactor::Row(r) => DMatrix::from_row_slice(1, self.d, r),
        }
    }

    pub fn m2_matrix(&self) -> DMatrix<f64> {
        materialize_symmetric(&self.m2)
    }

    pub fn m3_matrix(&self) -> DMatrix<f64> {
        materialize_symmetric(&self.m3)
    }

    /// First `k` rows of `M₁`, which is all of `M₁` the projected costs see.
    pub fn m1_rows(&self, k: usize) -> DMatrix<f64> {
        match &self.m1 {
            FirstFactor::Row(r) => {
                assert_eq!(k, 1, "gap-mode factors only carry the first row of M₁");
                DMatrix::from_row_slice(1, self.d, r)
            }
            FirstFactor::Symmetric(p) => {
                // rows of triu(X) + triu(X)ᵀ read straight from the packed triangle
                let d = self.d;
                let x = p.packed();
                let idx = |i: usize, j: usize| i * d - i * (i + 1) / 2 + j;
                DMatrix::from_fn(k, d, |i, j| match i.cmp(&j) {
                    std::cmp::Ordering::Equal => 2.0 * x[idx(i, i)],
                    std::cmp::Ordering::Less => x[idx(i, j)],
                    std::cmp::Ordering::Greater => x[idx(j, i)],
                })
            }
        }
    }

    /// Reinterprets the factors under another mode. Energy and partial modes
    /// share the same parameters; gap mode keeps the first row of `M₁`.
    pub fn convert(&self, mode: FactorMode) -> Result<Self> {
        check_mode(self.d, mode)?;
        let m1 = match (&self.m1, mode) {
            (FirstFactor::Symmetric(p), FactorMode::Gap) => {
                FirstFactor::Row(materialize_symmetric(p).row(0).iter().copied().collect())
            }
            (FirstFactor::Symmetric(p), _) => FirstFactor::Symmetric(p.clone()),
            (FirstFactor::Row(r), FactorMode::Gap) => FirstFactor::Row(r.clone()),
            (FirstFactor::Row(_), _) => {
                return Err(Error::Config(
                    "gap-mode factors cannot be widened to a full M₁".into(),
                ))
            }
        };
        Ok(Self { d: self.d, mode, m1, m2: self.m2.clone(), m3: self.m3.clone() })
    }
}

fn check_mode(d: usize, mode: FactorMode) -> Result<()> {
    if d == 0 {
        return Err(Error::Dimension("mode count must be positive".into()));
    }
    if let FactorMode::Partial(k) = mode {
        if k == 0 || k > d {
            return Err(Error::SubspaceOutOfRange { k, d });
        }
    }
    Ok(())
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m != &m.transpose() {
        return Err(Error::Config(format!("{name} must be exactly symmetric")));
    }
    Ok(())
}

/// Unconstrained gradients with respect to `M₁` (or the row `m₁`), `M₂`, `M₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGradient {
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub g3: DMatrix<f64>,
}

impl FactorGradient {
    /// Maps matrix gradients onto the flat parameter vector of `factors`.
    pub fn to_params(&self, factors: &TriangularFactors) -> Result<Vec<f64>> {
        use crate::symplectic::chain_gradient_to_params;
        let mut out = Vec::with_capacity(factors.num_params());
        match factors.first() {
            FirstFactor::Row(_) => out.extend(self.g1.iter().copied()),
            FirstFactor::Symmetric(_) => out.extend(chain_gradient_to_params(&self.g1)?),
        }
        out.extend(chain_gradient_to_params(&self.g2)?);
        out.extend(chain_gradient_to_params(&self.g3)?);
        Ok(out)
    }
}
