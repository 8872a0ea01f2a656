//! Discrete convex energy
//!
//! ```text
//! F(u) = Σ [ r_fit u + μ g |∇u| + θ d u + α ν_ε(u) ] h_x h_y
//! ```
//!
//! `|∇u|` uses forward differences (zero across the far boundary) and the
//! floored norm `sqrt(u_x² + u_y² + ε₂) - sqrt(ε₂)`, which vanishes for
//! constant `u`.

use super::penalty::penalty_nu;
use crate::grid::ScalarGrid;

/// Total-variation term `Σ g |∇u|_{ε₂} h_x h_y` (without `μ`).
pub fn weighted_tv(u: &ScalarGrid, edge: &ScalarGrid, eps2: f64) -> f64 {
    let (w, h) = (u.width(), u.height());
    let (hx, hy) = u.spacing();
    let v = u.values();
    let floor = eps2.sqrt();
    let mut sum = 0.0;
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let ux = if i + 1 < w {
                (v[k + 1] - v[k]) / hx
            } else {
                0.0
            };
            let uy = if j + 1 < h {
                (v[k + w] - v[k]) / hy
            } else {
                0.0
            };
            sum += edge.values()[k] * ((ux * ux + uy * uy + eps2).sqrt() - floor);
        }
    }
    sum * hx * hy
}

/// Energy for a precomputed residual `r = r_fit + θ d`.
pub fn energy_from_residual(
    u: &ScalarGrid,
    residual: &ScalarGrid,
    edge: &ScalarGrid,
    mu: f64,
    alpha: f64,
    eps: f64,
    eps2: f64,
) -> f64 {
    let (hx, hy) = u.spacing();
    let linear: f64 = u
        .values()
        .iter()
        .zip(residual.values())
        .map(|(&uk, &rk)| {
            rk * uk
                + if alpha != 0.0 {
                    alpha * penalty_nu(uk, eps)
                } else {
                    0.0
                }
        })
        .sum();
    linear * hx * hy + mu * weighted_tv(u, edge, eps2)
}
