//! Edge-preserving Gauss–Seidel pre-smoother `S^k` applied to the image
//! before the geodesic cost field is built.
//!
//! One sweep visits pixels in row-major order and replaces
//!
//! ```text
//! u_ij <- (A u_{i+1,j} + B u_{i-1,j} + C u_{i,j+1} + D u_{i,j-1} + ι z_ij)
//!         / (A + B + C + D + ι)
//! ```
//!
//! with `A = μ̃/h_x² · g_{i+1/2,j}` and so on. Half-point edge-detector values
//! are the mean of the two adjacent pixels, `g` is computed once from the
//! input, and coefficients pointing outside the grid are zero.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{edge_detector, gradient_magnitude_sq, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmootherParams {
    pub mu_tilde: f64,
    pub iota: f64,
    pub iterations: usize,
    /// `β` of the edge detector driving the diffusivity.
    pub edge_beta: f64,
}

impl Default for SmootherParams {
    fn default() -> Self {
        Self {
            mu_tilde: 1e-3,
            iota: 5e-4,
            iterations: 100,
            edge_beta: 1000.0,
        }
    }
}

impl SmootherParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_tilde > 0.0 && self.mu_tilde.is_finite()) {
            return Err(invalid("mu_tilde", "must be positive"));
        }
        if !(self.iota > 0.0 && self.iota.is_finite()) {
            return Err(invalid("iota", "must be positive"));
        }
        if !(self.edge_beta >= 0.0 && self.edge_beta.is_finite()) {
            return Err(invalid("edge_beta", "must be >= 0"));
        }
        Ok(())
    }
}

/// Runs `params.iterations` lexicographic sweeps; zero iterations return the
/// input unchanged.
pub fn gauss_seidel_smooth(image: &ScalarGrid, params: &SmootherParams) -> Result<ScalarGrid> {
    params.validate()?;
    if params.iterations == 0 {
        return Ok(image.clone());
    }
    let (w, h) = (image.width(), image.height());
    let (hx, hy) = image.spacing();
    let g = edge_detector(&gradient_magnitude_sq(image), params.edge_beta);
    let g = g.values();
    let (kx, ky) = (params.mu_tilde / (hx * hx), params.mu_tilde / (hy * hy));

    // Per-pixel [east, west, south, north] weights; frozen across sweeps.
    let mut weights = vec![[0.0f64; 4]; w * h];
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let wk = &mut weights[k];
            if i + 1 < w {
                wk[0] = kx * 0.5 * (g[k] + g[k + 1]);
            }
            if i > 0 {
                wk[1] = kx * 0.5 * (g[k] + g[k - 1]);
            }
            if j + 1 < h {
                wk[2] = ky * 0.5 * (g[k] + g[k + w]);
            }
            if j > 0 {
                wk[3] = ky * 0.5 * (g[k] + g[k - w]);
            }
        }
    }

    let z = image.values();
    let mut out = image.clone();
    let u = out.values_mut();
    let iota = params.iota;
    for _ in 0..params.iterations {
        for j in 0..h {
            for i in 0..w {
                let k = j * w + i;
                let [e, wst, s, n] = weights[k];
                let mut num = iota * z[k];
                if i + 1 < w {
                    num += e * u[k + 1];
                }
                if i > 0 {
                    num += wst * u[k - 1];
                }
                if j + 1 < h {
                    num += s * u[k + w];
                }
                if j > 0 {
                    num += n * u[k - w];
                }
                u[k] = num / (e + wst + s + n + iota);
            }
        }
    }
    Ok(out)
}
