//! Dense matrix products with optional per-thread operation counters.
//!
//! Counting is off unless `SYMPOPT_COUNT_OPS=1` is set in the environment or
//! [`force_counting`] is called on the current thread. The counters record how
//! many products were formed and the largest operand dimension seen, which is
//! enough to check that the block-diagonal paths never touch a 2d×2d matrix.

use std::cell::Cell;
use std::sync::OnceLock;

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub products: usize,
    pub max_dim: usize,
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { products: 0, max_dim: 0 }) };
    static FORCED: Cell<bool> = const { Cell::new(false) };
}

fn env_enabled() -> bool {
    static ENABLED: OnceLock<bool> = OnceLock::new();
    *ENABLED.get_or_init(|| {
        std::env::var("SYMPOPT_COUNT_OPS")
            .map(|v| v == "1")
            .unwrap_or(false)
    })
}

pub fn counting_enabled() -> bool {
    FORCED.with(|f| f.get()) || env_enabled()
}

/// Turns counting on or off for the calling thread regardless of the environment.
pub fn force_counting(on: bool) {
    FORCED.with(|f| f.set(on));
}

pub fn reset_counts() {
    COUNTS.with(|c| c.set(OpCounts::default()));
}

pub fn counts() -> OpCounts {
    COUNTS.with(|c| c.get())
}

#[inline]
fn record(dims: [usize; 3]) {
    if counting_enabled() {
        COUNTS.with(|c| {
            let mut v = c.get();
            v.products += 1;
            v.max_dim = v.max_dim.max(dims[0]).max(dims[1]).max(dims[2]);
            c.set(v);
        });
    }
}

/// `a * b`
pub fn mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    record([a.nrows(), a.ncols(), b.ncols()]);
    a * b
}

/// `aᵀ * b`
pub fn tr_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    record([a.ncols(), a.nrows(), b.ncols()]);
    a.tr_mul(b)
}

/// `a * bᵀ`
pub fn mul_tr(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    record([a.nrows(), a.ncols(), b.nrows()]);
    a * b.transpose()
}

/// tr(a bᵀ) = Σ a∘b, no product formed.
pub fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}
