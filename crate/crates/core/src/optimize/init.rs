use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cost::{FactorMode, TriangularFactors};
use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticHamiltonian;

/// Starting point for the factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// `M₁ = M₂ = M₃ = 0`. For block-diagonal `H` this point is stationary,
    /// so gradient methods never leave it.
    Zero,
    /// Interaction-seeded start; see [`interaction_seed`].
    GammaT,
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(InitKind::Zero),
            "gamma_t" => Ok(InitKind::GammaT),
            _ => Err(Error::Config(format!("unknown init {s:?} (zero | gamma_t)"))),
        }
    }
}

/// Coupling part of the position block: `ρ⁻³T` for lattices, otherwise the
/// off-diagonal part of the upper-left `d × d` block of `H`.
pub fn interaction_seed(ham: &QuadraticHamiltonian) -> DMatrix<f64> {
    let d = ham.modes();
    let mut t = match ham.lattice() {
        Some(l) => l.interaction.clone(),
        None => ham.matrix().view((0, 0), (d, d)).into_owned(),
    };
    t.fill_diagonal(0.0);
    (&t + t.transpose()) * 0.5
}

pub fn init_factors(
    ham: &QuadraticHamiltonian,
    mode: FactorMode,
    kind: InitKind,
) -> Result<TriangularFactors> {
    let d = ham.modes();
    match kind {
        InitKind::Zero => TriangularFactors::zeros(d, mode),
        InitKind::GammaT => {
            let t = interaction_seed(ham);
            let zero = DMatrix::zeros(d, d);
            let m1 = match mode {
                FactorMode::Gap => t.rows(0, 1).into_owned(),
                _ => t,
            };
            TriangularFactors::from_matrices(mode, &m1, &zero, &zero)
        }
    }
}
