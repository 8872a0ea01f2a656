//! Deterministic synthetic test images with analytic ground truth.
//!
//! All geometry scales with `size`. Shapes are rasterized without
//! anti-aliasing so the ground truth matches the clean image exactly.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::distance::MarkerSet;
use crate::error::{invalid, Error, Result};
use crate::grid::{gaussian_convolve, GridIndex, Mask, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Bright disc with grey distractor shapes, one of them a set of nested
    /// rings.
    CircleAmongShapes,
    /// Two equal discs joined by a blurred neck; the target is the left
    /// disc and the default anti-marker sits in the right one.
    TwoTouchingCirclesBlurredBridge,
    /// Bright disc on a mid-grey background with dark distractors.
    BrightObjectDarkDistractors,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] = [
        SyntheticKind::CircleAmongShapes,
        SyntheticKind::TwoTouchingCirclesBlurredBridge,
        SyntheticKind::BrightObjectDarkDistractors,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::CircleAmongShapes => "circle_among_shapes",
            SyntheticKind::TwoTouchingCirclesBlurredBridge => "two_touching_circles_blurred_bridge",
            SyntheticKind::BrightObjectDarkDistractors => "bright_object_dark_distractors",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid("kind", format!("unknown synthetic kind `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub image: ScalarGrid,
    pub ground_truth: Mask,
    pub markers: MarkerSet,
    /// Disc centre and radius of the target, in pixels.
    pub target: (f64, f64, f64),
}

fn disc(cx: f64, cy: f64, r: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1
}

fn triangle(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> impl Fn(f64, f64) -> bool {
    let edge = |p: (f64, f64), q: (f64, f64), x: f64, y: f64| {
        (q.0 - p.0) * (y - p.1) - (q.1 - p.1) * (x - p.0)
    };
    move |x, y| {
        let (d1, d2, d3) = (edge(a, b, x, y), edge(b, c, x, y), edge(c, a, x, y));
        (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
    }
}

fn paint(img: &mut ScalarGrid, value: f64, inside: impl Fn(f64, f64) -> bool) {
    for j in 0..img.height() {
        for i in 0..img.width() {
            if inside(i as f64, j as f64) {
                img.set(i, j, value);
            }
        }
    }
}

fn marker_at(x: f64, y: f64) -> GridIndex {
    GridIndex::new(x.round() as usize, y.round() as usize)
}

/// Generates `kind` at `size × size` with additive Gaussian noise of
/// standard deviation `noise_level` (clipped to `[0, 1]`).
pub fn generate_synthetic(
    kind: SyntheticKind,
    size: usize,
    noise_level: f64,
    seed: u64,
) -> Result<Synthetic> {
    if size < 32 {
        return Err(Error::SyntheticTooSmall(size));
    }
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(invalid("noise_level", "must be finite and >= 0"));
    }
    let n = size as f64;
    let mut img = ScalarGrid::filled(size, size, 0.0);
    let (target, markers) = match kind {
        SyntheticKind::CircleAmongShapes => {
            img = img.map(|_| 0.2);
            let (cx, cy, r) = (0.3 * n, 0.32 * n, 0.16 * n);
            paint(&mut img, 0.4, rect(0.6 * n, 0.12 * n, 0.85 * n, 0.32 * n));
            paint(
                &mut img,
                0.4,
                triangle(
                    (0.12 * n, 0.88 * n),
                    (0.42 * n, 0.88 * n),
                    (0.27 * n, 0.6 * n),
                ),
            );
            // Nested rings around a small core.
            let (rx, ry) = (0.72 * n, 0.7 * n);
            let step = 0.02 * n;
            for k in (0..9).rev() {
                let value = if k % 2 == 0 { 0.4 } else { 0.2 };
                paint(&mut img, value, disc(rx, ry, step * (k as f64 + 1.0)));
            }
            paint(&mut img, 0.8, disc(cx, cy, r));
            ((cx, cy, r), MarkerSet::new(vec![marker_at(cx, cy)], vec![]))
        }
        SyntheticKind::TwoTouchingCirclesBlurredBridge => {
            let (ax, bx, cy, r) = (0.3 * n, 0.7 * n, 0.5 * n, 0.17 * n);
            let mut bridge = ScalarGrid::filled(size, size, 0.0);
            paint(&mut bridge, 1.0, rect(ax, cy - 0.05 * n, bx, cy + 0.05 * n));
            let bridge = gaussian_convolve(&bridge, 0.03 * n)?;
            let (in_a, in_b) = (disc(ax, cy, r), disc(bx, cy, r));
            img = ScalarGrid::from_fn(size, size, |i, j| {
                let (x, y) = (i as f64, j as f64);
                let level = if in_a(x, y) || in_b(x, y) {
                    1.0
                } else {
                    0.6 * bridge.get(i, j)
                };
                0.2 + 0.6 * level
            });
            let markers =
                MarkerSet::new(vec![marker_at(ax + 0.4 * r, cy)], vec![marker_at(bx, cy)]);
            ((ax, cy, r), markers)
        }
        SyntheticKind::BrightObjectDarkDistractors => {
            img = img.map(|_| 0.4);
            let (cx, cy, r) = (0.62 * n, 0.4 * n, 0.15 * n);
            paint(&mut img, 0.05, disc(0.22 * n, 0.25 * n, 0.12 * n));
            paint(&mut img, 0.05, rect(0.15 * n, 0.6 * n, 0.45 * n, 0.85 * n));
            paint(
                &mut img,
                0.05,
                triangle((0.55 * n, 0.9 * n), (0.9 * n, 0.9 * n), (0.8 * n, 0.65 * n)),
            );
            paint(&mut img, 0.9, disc(cx, cy, r));
            ((cx, cy, r), MarkerSet::new(vec![marker_at(cx, cy)], vec![]))
        }
    };
    let (cx, cy, r) = target;
    let inside = disc(cx, cy, r);
    let ground_truth = Mask::from_fn(size, size, |i, j| inside(i as f64, j as f64));

    if noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_level).expect("valid normal");
        for v in img.values_mut() {
            *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    Ok(Synthetic {
        image: img,
        ground_truth,
        markers,
        target,
    })
}
