//! Central-difference gradients, the reference every analytic gradient is
//! checked against.

/// Default step for central differences.
pub const FD_STEP: f64 = 1e-6;
/// Acceptance threshold on the relative gradient deviation.
pub const FD_REL_TOL: f64 = 1e-6;

/// `(f(x + h eᵢ) − f(x − h eᵢ)) / 2h` for every coordinate.
pub fn fd_gradient_oracle<F>(cost: F, params: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut x = params.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + step;
            let fp = cost(&x);
            x[i] = orig - step;
            let fm = cost(&x);
            x[i] = orig;
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Largest `|a − n| / max(1, |a|)` over the entries.
pub fn max_relative_deviation(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}
