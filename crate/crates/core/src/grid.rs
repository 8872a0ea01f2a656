//! Pixel-lattice containers and the pointwise/stencil operators shared by
//! the distance, smoothing and solver stages.
//!
//! Grids are row-major: the value of column `i`, row `j` lives at
//! `j * width + i`. Spacing `h_x`, `h_y` defaults to one pixel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel address: `i` is the column, `j` the row, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct GridIndex {
    pub i: usize,
    pub j: usize,
}

impl GridIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl From<[usize; 2]> for GridIndex {
    fn from([i, j]: [usize; 2]) -> Self {
        Self { i, j }
    }
}

impl From<GridIndex> for [usize; 2] {
    fn from(g: GridIndex) -> Self {
        [g.i, g.j]
    }
}

/// Dimensions and spacing of a grid, without its values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub width: usize,
    pub height: usize,
    pub spacing_x: f64,
    pub spacing_y: f64,
}

impl GridShape {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            spacing_x: 1.0,
            spacing_y: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: GridIndex) -> bool {
        p.i < self.width && p.j < self.height
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }
}

/// 2D field of reals on a pixel lattice (images, distance maps, the relaxed
/// indicator `u`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    spacing_x: f64,
    spacing_y: f64,
    values: Vec<f64>,
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(Error::GridTooSmall { width, height });
    }
    Ok(())
}

impl ScalarGrid {
    /// Builds a grid from row-major values, rejecting undersized grids and
    /// non-finite entries.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::GridLength {
                width,
                height,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self {
            width,
            height,
            spacing_x: 1.0,
            spacing_y: 1.0,
            values,
        })
    }

    /// # Panics
    /// If either dimension is below 2.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        check_dims(width, height).expect("grid dimensions");
        Self {
            width,
            height,
            spacing_x: 1.0,
            spacing_y: 1.0,
            values: vec![value; width * height],
        }
    }

    /// # Panics
    /// If either dimension is below 2.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        check_dims(width, height).expect("grid dimensions");
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            spacing_x: 1.0,
            spacing_y: 1.0,
            values,
        }
    }

    /// Same dimensions and spacing as `shape`, every value `value`.
    pub fn like(shape: GridShape, value: f64) -> Self {
        Self {
            width: shape.width,
            height: shape.height,
            spacing_x: shape.spacing_x,
            spacing_y: shape.spacing_y,
            values: vec![value; shape.len()],
        }
    }

    pub fn with_spacing(mut self, spacing_x: f64, spacing_y: f64) -> Result<Self> {
        if !(spacing_x > 0.0 && spacing_y > 0.0 && spacing_x.is_finite() && spacing_y.is_finite()) {
            return Err(Error::InvalidSpacing(spacing_x, spacing_y));
        }
        self.spacing_x = spacing_x;
        self.spacing_y = spacing_y;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.spacing_x, self.spacing_y)
    }

    pub fn shape(&self) -> GridShape {
        GridShape {
            width: self.width,
            height: self.height,
            spacing_x: self.spacing_x,
            spacing_y: self.spacing_y,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.width + i] = v;
    }

    pub fn at(&self, p: GridIndex) -> f64 {
        self.get(p.i, p.j)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Largest absolute value.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Pointwise combination of two grids of equal shape.
    pub fn zip_map(&self, other: &ScalarGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    pub fn ensure_same_shape(&self, other: &ScalarGrid) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch(
                (self.width, self.height),
                (other.width, other.height),
            ));
        }
        Ok(())
    }

    /// Max absolute pointwise difference.
    pub fn max_abs_diff(&self, other: &ScalarGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Binary segmentation mask with the same row-major layout as [`ScalarGrid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::GridLength {
                width,
                height,
                got: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        check_dims(width, height).expect("mask dimensions");
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.values[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.values[j * self.width + i] = v;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// 1.0 where set, 0.0 elsewhere.
    pub fn to_grid(&self) -> ScalarGrid {
        ScalarGrid {
            width: self.width,
            height: self.height,
            spacing_x: 1.0,
            spacing_y: 1.0,
            values: self
                .values
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Affine rescale to [0, 1]; a constant grid maps to all zeros.
pub fn normalize(grid: &ScalarGrid) -> ScalarGrid {
    let (lo, hi) = (grid.min(), grid.max());
    let range = hi - lo;
    if range <= 0.0 {
        return grid.map(|_| 0.0);
    }
    grid.map(|v| ((v - lo) / range).clamp(0.0, 1.0))
}

/// Partial derivatives `(z_x, z_y)` per pixel: central differences in the
/// interior, one-sided at the boundary.
pub fn gradient(grid: &ScalarGrid) -> (ScalarGrid, ScalarGrid) {
    let (w, h) = (grid.width, grid.height);
    let (hx, hy) = grid.spacing();
    let mut gx = grid.map(|_| 0.0);
    let mut gy = gx.clone();
    for j in 0..h {
        for i in 0..w {
            let dx = if i == 0 {
                (grid.get(1, j) - grid.get(0, j)) / hx
            } else if i == w - 1 {
                (grid.get(w - 1, j) - grid.get(w - 2, j)) / hx
            } else {
                (grid.get(i + 1, j) - grid.get(i - 1, j)) / (2.0 * hx)
            };
            let dy = if j == 0 {
                (grid.get(i, 1) - grid.get(i, 0)) / hy
            } else if j == h - 1 {
                (grid.get(i, h - 1) - grid.get(i, h - 2)) / hy
            } else {
                (grid.get(i, j + 1) - grid.get(i, j - 1)) / (2.0 * hy)
            };
            gx.set(i, j, dx);
            gy.set(i, j, dy);
        }
    }
    (gx, gy)
}

/// `|∇z|²` per pixel with the [`gradient`] stencil.
pub fn gradient_magnitude_sq(grid: &ScalarGrid) -> ScalarGrid {
    let (gx, gy) = gradient(grid);
    gx.zip_map(&gy, |a, b| a * a + b * b)
        .expect("gradient components share a shape")
}

/// Edge detector `g = 1 / (1 + beta * |∇z|²)`, applied to a precomputed
/// squared gradient magnitude.
pub fn edge_detector(grad_sq: &ScalarGrid, beta: f64) -> ScalarGrid {
    grad_sq.map(|s| 1.0 / (1.0 + beta * s))
}

/// Normalized 1D Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_convolve(grid: &ScalarGrid, sigma: f64) -> Result<ScalarGrid> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(crate::error::invalid(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (grid.width as isize, grid.height as isize);

    let mut tmp = grid.clone();
    for j in 0..h {
        for i in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(t, k)| {
                    let ii = (i + t as isize - radius).clamp(0, w - 1);
                    k * grid.get(ii as usize, j as usize)
                })
                .sum();
            tmp.set(i as usize, j as usize, acc);
        }
    }
    let mut out = tmp.clone();
    for j in 0..h {
        for i in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(t, k)| {
                    let jj = (j + t as isize - radius).clamp(0, h - 1);
                    k * tmp.get(i as usize, jj as usize)
                })
                .sum();
            out.set(i as usize, j as usize, acc);
        }
    }
    Ok(out)
}
