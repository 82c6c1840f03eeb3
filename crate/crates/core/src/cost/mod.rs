//! Cost functions over unit-triangular factors and their analytic gradients.

mod energy;
mod factors;
mod finite_diff;
mod projected;

pub use energy::{
    build_l3, covariance, energy_cost, energy_cost_grad, energy_grad, energy_grad_block,
    energy_grad_generic,
};
pub use factors::{FactorGradient, FactorMode, FirstFactor, TriangularFactors};
pub use finite_diff::{fd_gradient_oracle, max_relative_deviation, FD_REL_TOL, FD_STEP};
pub use projected::{
    gap_cost, gap_estimate, gap_grad, partial_cost, partial_cost_grad, partial_sum_estimate,
    projected_factor, projected_spectrum, successive_differences,
};

use crate::error::Result;
use crate::hamiltonian::QuadraticHamiltonian;

/// A smooth scalar function of a flat parameter vector.
pub trait Objective {
    fn num_params(&self) -> usize;

    /// Value and gradient at `x`.
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// The cost selected by the factor mode, seen as a function of the flat
/// parameters of `template`.
#[derive(Debug, Clone)]
pub struct FactorObjective<'a> {
    ham: &'a QuadraticHamiltonian,
    template: TriangularFactors,
}

impl<'a> FactorObjective<'a> {
    pub fn new(ham: &'a QuadraticHamiltonian, template: TriangularFactors) -> Self {
        Self { ham, template }
    }

    pub fn factors(&self, x: &[f64]) -> Result<TriangularFactors> {
        self.template.with_params(x)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let f = self.factors(x)?;
        match f.mode() {
            FactorMode::Energy => energy_cost(&f, self.ham),
            FactorMode::Gap => gap_cost(&f, self.ham),
            FactorMode::Partial(k) => partial_cost(&f, self.ham, k),
        }
    }
}

impl Objective for FactorObjective<'_> {
    fn num_params(&self) -> usize {
        self.template.num_params()
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.factors(x)?;
        let (v, g) = match f.mode() {
            FactorMode::Energy => energy_cost_grad(&f, self.ham)?,
            FactorMode::Gap => partial_cost_grad(&f, self.ham, 1)?,
            FactorMode::Partial(k) => partial_cost_grad(&f, self.ham, k)?,
        };
        Ok((v, g.to_params(&f)?))
    }
}
