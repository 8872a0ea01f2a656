//! Distance penalties: Euclidean distance to the markers, edge-weighted
//! geodesic distance through the cost field
//! `f₂ = ε_D + β_G |∇S^k z|² + ϑ D_E`, the exponentially decaying
//! anti-marker term, and their combination.

mod eikonal;
mod euclidean;

pub use eikonal::{solve_eikonal, upwind_update};
pub use euclidean::{euclidean_distance, euclidean_distance_raw, normalize_by_max};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{edge_detector, gradient_magnitude_sq, GridIndex, GridShape, ScalarGrid};
use crate::smoothing::{gauss_seidel_smooth, SmootherParams};

/// Marker pixels inside the target (`M`) and optional anti-marker pixels
/// inside objects to exclude (`AM`).
///
/// JSON form: `{"markers": [[i, j], ...], "anti_markers": [[i, j], ...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerSet {
    pub markers: Vec<GridIndex>,
    #[serde(default)]
    pub anti_markers: Vec<GridIndex>,
}

impl MarkerSet {
    /// Sorted, de-duplicated copy of both sets.
    pub fn new(markers: Vec<GridIndex>, anti_markers: Vec<GridIndex>) -> Self {
        let dedup = |v: Vec<GridIndex>| -> Vec<GridIndex> {
            v.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
        };
        Self {
            markers: dedup(markers),
            anti_markers: dedup(anti_markers),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MarkerSet = serde_json::from_str(text)?;
        Ok(Self::new(raw.markers, raw.anti_markers))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("marker set serializes")
    }

    /// Checks the invariants a segmentation run relies on: non-empty
    /// markers, everything in bounds, no pixel in both sets.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.markers.is_empty() {
            return Err(Error::EmptyMarkers);
        }
        let shape = GridShape::new(width, height);
        for p in self.markers.iter().chain(&self.anti_markers) {
            if !shape.contains(*p) {
                return Err(Error::MarkerOutOfBounds {
                    i: p.i,
                    j: p.j,
                    width,
                    height,
                });
            }
        }
        let markers: BTreeSet<_> = self.markers.iter().collect();
        if let Some(p) = self.anti_markers.iter().find(|p| markers.contains(p)) {
            return Err(Error::MarkerConflict { i: p.i, j: p.j });
        }
        Ok(())
    }
}

/// Constants of the distance construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    pub beta_g: f64,
    pub eps_d: f64,
    pub vartheta: f64,
    pub alpha_tilde: f64,
    pub smoothing_iterations: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            beta_g: 1000.0,
            eps_d: 1e-3,
            vartheta: 0.1,
            alpha_tilde: 200.0,
            smoothing_iterations: 100,
        }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta_g", self.beta_g),
            ("eps_d", self.eps_d),
            ("vartheta", self.vartheta),
            ("alpha_tilde", self.alpha_tilde),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Smoother settings used to pre-filter the image before the cost field
    /// is built; the edge detector inside the smoother shares `beta_g`.
    pub fn smoother(&self) -> SmootherParams {
        SmootherParams {
            iterations: self.smoothing_iterations,
            edge_beta: self.beta_g,
            ..SmootherParams::default()
        }
    }
}

/// Pointwise `ε_D + β_G |∇S^k z|² + ϑ D_E`.
pub fn build_edge_cost(
    smoothed_image: &ScalarGrid,
    d_euclid: &ScalarGrid,
    cfg: &DistanceConfig,
) -> Result<ScalarGrid> {
    gradient_magnitude_sq(smoothed_image).zip_map(d_euclid, |g, de| {
        cfg.eps_d + cfg.beta_g * g + cfg.vartheta * de
    })
}

/// Normalized geodesic distance from `seeds` together with the fields it
/// was built from.
#[derive(Debug, Clone)]
pub struct GeodesicField {
    pub distance: ScalarGrid,
    pub euclidean: ScalarGrid,
    pub cost: ScalarGrid,
}

/// Runs the full geodesic construction from a seed set over an already
/// smoothed image.
pub fn geodesic_from(
    smoothed_image: &ScalarGrid,
    seeds: &[GridIndex],
    cfg: &DistanceConfig,
) -> Result<GeodesicField> {
    let euclidean = euclidean_distance(smoothed_image.shape(), seeds)?;
    let cost = build_edge_cost(smoothed_image, &euclidean, cfg)?;
    let raw = solve_eikonal(&cost, seeds)?;
    Ok(GeodesicField {
        distance: normalize_by_max(raw),
        euclidean,
        cost,
    })
}

/// `D_M`: geodesic distance from the markers divided by its maximum.
pub fn marker_distance(
    smoothed_image: &ScalarGrid,
    markers: &[GridIndex],
    cfg: &DistanceConfig,
) -> Result<ScalarGrid> {
    Ok(geodesic_from(smoothed_image, markers, cfg)?.distance)
}

/// `(exp(-α̃ d) - exp(-α̃)) / (1 - exp(-α̃))`: 1 at `d = 0`, 0 at `d = 1`.
pub fn anti_marker_transform(d: f64, alpha_tilde: f64) -> f64 {
    if alpha_tilde == 0.0 {
        return 1.0 - d;
    }
    let floor = (-alpha_tilde).exp();
    ((-alpha_tilde * d).exp() - floor) / (1.0 - floor)
}

/// `D_AM`; all zeros when there are no anti-markers.
pub fn anti_marker_distance(
    smoothed_image: &ScalarGrid,
    anti_markers: &[GridIndex],
    cfg: &DistanceConfig,
) -> Result<ScalarGrid> {
    if anti_markers.is_empty() {
        return Ok(smoothed_image.map(|_| 0.0));
    }
    let d = geodesic_from(smoothed_image, anti_markers, cfg)?.distance;
    Ok(d.map(|v| anti_marker_transform(v, cfg.alpha_tilde)))
}

/// `D_G = (D_M + D_AM) / 2`, or `D_M` itself without anti-markers.
pub fn combined_distance(d_m: &ScalarGrid, d_am: Option<&ScalarGrid>) -> Result<ScalarGrid> {
    match d_am {
        None => Ok(d_m.clone()),
        Some(d_am) => d_m.zip_map(d_am, |a, b| 0.5 * (a + b)),
    }
}

/// Every distance field the solver needs for one image and marker set.
#[derive(Debug, Clone)]
pub struct DistanceBundle {
    /// `D_E`, normalized Euclidean distance from the markers.
    pub euclidean: ScalarGrid,
    /// `D_M`, normalized geodesic distance from the markers.
    pub marker_geodesic: ScalarGrid,
    /// `D_AM`; zeros when there are no anti-markers.
    pub anti_marker: ScalarGrid,
    /// `D_G`.
    pub combined: ScalarGrid,
    /// `f₂` for the marker set.
    pub cost_field: ScalarGrid,
    /// `g(|∇z|)` of the unsmoothed image, used by the regularizer.
    pub edge_map: ScalarGrid,
    pub has_anti_markers: bool,
}

impl DistanceBundle {
    /// Builds all fields for a normalized image.
    pub fn build(image: &ScalarGrid, markers: &MarkerSet, cfg: &DistanceConfig) -> Result<Self> {
        cfg.validate()?;
        markers.validate(image.width(), image.height())?;
        let smoothed = gauss_seidel_smooth(image, &cfg.smoother())?;
        let marker_field = geodesic_from(&smoothed, &markers.markers, cfg)?;
        let has_anti_markers = !markers.anti_markers.is_empty();
        let anti_marker = anti_marker_distance(&smoothed, &markers.anti_markers, cfg)?;
        let combined = combined_distance(
            &marker_field.distance,
            has_anti_markers.then_some(&anti_marker),
        )?;
        Ok(Self {
            euclidean: marker_field.euclidean,
            marker_geodesic: marker_field.distance,
            anti_marker,
            combined,
            cost_field: marker_field.cost,
            edge_map: edge_detector(&gradient_magnitude_sq(image), cfg.beta_g),
            has_anti_markers,
        })
    }
}
