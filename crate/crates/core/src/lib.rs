//! Ground-state energies, covariance matrices, spectral gaps and partial
//! symplectic spectra of quadratic bosonic Hamiltonians, found by
//! unconstrained minimization over unit-triangular symplectic factors and
//! checked against exact symplectic diagonalization.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod gaussian;
pub mod hamiltonian;
pub mod matfile;
pub mod ops;
pub mod optimize;
pub mod symplectic;

pub use error::{Error, Result};
