//! Semi-implicit additive operator splitting step with damping of the
//! penalty term near its jumps.
//!
//! For each axis `ℓ` the step solves, line by line,
//!
//! ```text
//! (I - 2τμ (I + B̃)⁻¹ A_ℓ(u)) v_ℓ = u - τ (I + B̃)⁻¹ f
//! ```
//!
//! and returns `(v_x + v_y) / 2`. `A_ℓ` is the 1D divergence operator with
//! half-point diffusivities, `B̃ = diag(τ α b̃)` where `b̃ = b` on pixels with
//! `u` in the jump interval and 0 elsewhere. Every row of the line matrix
//! sums to one because the rows of `A_ℓ` sum to zero under Neumann
//! boundaries.

use rayon::prelude::*;

use super::penalty::{in_jump_interval, jump_slope};
use super::SolverParams;
use crate::error::Result;
use crate::grid::{gradient, ScalarGrid};

use super::thomas::thomas_in_place;

/// Half-point diffusivities divided by `h²`. `east` couples `(i, j)` with
/// `(i + 1, j)`, `west` with `(i - 1, j)`, `north` with `(i, j - 1)`,
/// `south` with `(i, j + 1)`. Couplings across the boundary are zero.
#[derive(Debug, Clone)]
pub struct HalfPointCoefficients {
    pub east: ScalarGrid,
    pub west: ScalarGrid,
    pub north: ScalarGrid,
    pub south: ScalarGrid,
}

impl HalfPointCoefficients {
    pub fn zeros_like(u: &ScalarGrid) -> Self {
        let z = u.map(|_| 0.0);
        Self {
            east: z.clone(),
            west: z.clone(),
            north: z.clone(),
            south: z,
        }
    }
}

/// Pixel diffusivity `G = g / sqrt(u_x² + u_y² + ε₂)` averaged onto the
/// half points.
pub fn diffusivity_half_points(
    edge: &ScalarGrid,
    u: &ScalarGrid,
    eps2: f64,
) -> HalfPointCoefficients {
    let (ux, uy) = gradient(u);
    let (w, h) = (u.width(), u.height());
    let (hx, hy) = u.spacing();
    let mut g = u.map(|_| 0.0);
    for (k, slot) in g.values_mut().iter_mut().enumerate() {
        let (a, b) = (ux.values()[k], uy.values()[k]);
        *slot = edge.values()[k] / (a * a + b * b + eps2).sqrt();
    }
    let g = g.values();
    let mut c = HalfPointCoefficients::zeros_like(u);
    let (ix2, iy2) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            if i + 1 < w {
                let v = 0.5 * (g[k] + g[k + 1]) * ix2;
                c.east.values_mut()[k] = v;
                c.west.values_mut()[k + 1] = v;
            }
            if j + 1 < h {
                let v = 0.5 * (g[k] + g[k + w]) * iy2;
                c.south.values_mut()[k] = v;
                c.north.values_mut()[k + w] = v;
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// One tridiagonal system along a grid row (`Axis::X`) or column
/// (`Axis::Y`), in the [`thomas_in_place`] layout.
#[derive(Debug, Clone)]
pub struct LineSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

/// Diagonal entries of `B̃ = diag(τ α b̃)`.
pub fn damping_diagonal(u: &ScalarGrid, params: &SolverParams, alpha: f64) -> Vec<f64> {
    let b = jump_slope(params.eps_heaviside);
    u.values()
        .iter()
        .map(|&v| {
            if in_jump_interval(v, params.zeta) {
                params.tau * alpha * b
            } else {
                0.0
            }
        })
        .collect()
}

/// Assembles every line system for one axis.
pub fn line_systems(
    u: &ScalarGrid,
    coeffs: &HalfPointCoefficients,
    f: &ScalarGrid,
    params: &SolverParams,
    alpha: f64,
    axis: Axis,
) -> Vec<LineSystem> {
    let damping = damping_diagonal(u, params, alpha);
    let (w, h) = (u.width(), u.height());
    let (lines, len) = match axis {
        Axis::X => (h, w),
        Axis::Y => (w, h),
    };
    let (back, fwd) = match axis {
        Axis::X => (coeffs.west.values(), coeffs.east.values()),
        Axis::Y => (coeffs.north.values(), coeffs.south.values()),
    };
    let scale = 2.0 * params.tau * params.mu;
    (0..lines)
        .map(|line| {
            let mut sys = LineSystem {
                lower: vec![0.0; len],
                diag: vec![0.0; len],
                upper: vec![0.0; len],
                rhs: vec![0.0; len],
            };
            for pos in 0..len {
                let k = match axis {
                    Axis::X => line * w + pos,
                    Axis::Y => pos * w + line,
                };
                let inv = 1.0 / (1.0 + damping[k]);
                let (lo, up) = (scale * inv * back[k], scale * inv * fwd[k]);
                sys.lower[pos] = -lo;
                sys.upper[pos] = -up;
                sys.diag[pos] = 1.0 + lo + up;
                sys.rhs[pos] = u.values()[k] - params.tau * inv * f.values()[k];
            }
            sys
        })
        .collect()
}

fn solve_axis(
    u: &ScalarGrid,
    coeffs: &HalfPointCoefficients,
    f: &ScalarGrid,
    params: &SolverParams,
    alpha: f64,
    axis: Axis,
) -> Result<Vec<Vec<f64>>> {
    line_systems(u, coeffs, f, params, alpha, axis)
        .into_par_iter()
        .map(|mut sys| {
            let mut scratch = vec![0.0; sys.rhs.len()];
            thomas_in_place(
                &sys.lower,
                &sys.diag,
                &sys.upper,
                &mut sys.rhs,
                &mut scratch,
            )?;
            Ok(sys.rhs)
        })
        .collect()
}

/// One damped AOS update of `u` for forcing `f = r + α ν_ε'(u)`.
pub fn aos_step(
    u: &ScalarGrid,
    coeffs: &HalfPointCoefficients,
    f: &ScalarGrid,
    params: &SolverParams,
    alpha: f64,
) -> Result<ScalarGrid> {
    let w = u.width();
    let rows = solve_axis(u, coeffs, f, params, alpha, Axis::X)?;
    let cols = solve_axis(u, coeffs, f, params, alpha, Axis::Y)?;
    let mut out = u.clone();
    for (k, slot) in out.values_mut().iter_mut().enumerate() {
        let (i, j) = (k % w, k / w);
        *slot = 0.5 * (rows[j][i] + cols[i][j]);
    }
    Ok(out)
}
