//! Tridiagonal (Thomas) solves for the AOS line systems.
//!
//! Row `k` reads `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]`;
//! `lower[0]` and `upper[n-1]` are ignored.

use crate::error::{Error, Result};

/// Solves in place: `x` holds the right-hand side on entry and the solution
/// on exit. `scratch` must be at least `x.len()` long.
pub fn thomas_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    x: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = x.len();
    debug_assert!(lower.len() >= n && diag.len() >= n && upper.len() >= n);
    if n == 0 {
        return Ok(());
    }
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularLineSystem(0));
    }
    x[0] /= pivot;
    for k in 1..n {
        scratch[k - 1] = upper[k - 1] / pivot;
        pivot = diag[k] - lower[k] * scratch[k - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularLineSystem(k));
        }
        x[k] = (x[k] - lower[k] * x[k - 1]) / pivot;
    }
    for k in (0..n - 1).rev() {
        x[k] -= scratch[k] * x[k + 1];
    }
    Ok(())
}

/// Allocating wrapper around [`thomas_in_place`].
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; rhs.len()];
    thomas_in_place(lower, diag, upper, &mut x, &mut scratch)?;
    Ok(x)
}
