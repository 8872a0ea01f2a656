//! (λ, θ) parameter maps and the smoothing/noise study.

use std::path::Path;
use std::time::Instant;

use image::{GrayImage, Luma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::tanimoto;
use super::synthetic::{generate_synthetic, SyntheticKind};
use crate::distance::{DistanceBundle, DistanceConfig, MarkerSet};
use crate::error::{invalid, Result};
use crate::grid::{Mask, ScalarGrid};
use crate::solver::{segment, SolverParams};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub lambda_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// Template for every run; `lambda1`, `lambda2` and `theta` are
    /// overwritten per grid point.
    pub fixed: SolverParams,
    pub ground_truth: Mask,
}

impl SweepSpec {
    pub fn validate(&self, image: &ScalarGrid) -> Result<()> {
        if self.lambda_values.is_empty() || self.theta_values.is_empty() {
            return Err(invalid(
                "sweep",
                "lambda and theta value lists must be non-empty",
            ));
        }
        if self.ground_truth.width() != image.width()
            || self.ground_truth.height() != image.height()
        {
            return Err(crate::error::Error::ShapeMismatch(
                (self.ground_truth.width(), self.ground_truth.height()),
                (image.width(), image.height()),
            ));
        }
        self.fixed.validate()
    }

    /// Grid points in λ-major order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.lambda_values
            .iter()
            .flat_map(|&l| self.theta_values.iter().map(move |&t| (l, t)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub theta: f64,
    /// `-1` when the run failed.
    pub tc: f64,
    pub iterations: usize,
    pub seconds: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

/// Runs one segmentation per `(λ, θ)` in `points`, in parallel. Rows come
/// back in the order of `points`.
pub fn sweep_points(
    image: &ScalarGrid,
    bundle: &DistanceBundle,
    spec: &SweepSpec,
    points: &[(f64, f64)],
) -> Vec<SweepRow> {
    points
        .par_iter()
        .map(|&(lambda, theta)| {
            let params = SolverParams {
                theta,
                ..spec.fixed.with_lambda(lambda)
            };
            let start = Instant::now();
            let outcome = segment(image, bundle, &params, image)
                .and_then(|r| Ok((tanimoto(&r.mask, &spec.ground_truth)?, r.iterations)));
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok((tc, iterations)) => SweepRow {
                    lambda,
                    theta,
                    tc,
                    iterations,
                    seconds,
                    error: None,
                },
                Err(e) => SweepRow {
                    lambda,
                    theta,
                    tc: -1.0,
                    iterations: 0,
                    seconds,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Full λ × θ sweep on a normalized image.
pub fn parameter_sweep(
    image: &ScalarGrid,
    markers: &MarkerSet,
    distance: &DistanceConfig,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>> {
    spec.validate(image)?;
    let bundle = DistanceBundle::build(image, markers, distance)?;
    Ok(sweep_points(image, &bundle, spec, &spec.points()))
}

pub fn sweep_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Heatmap of TC over the grid: one `cell × cell` block per point, λ down
/// the rows and θ across the columns; failed runs are black.
pub fn sweep_heatmap(spec: &SweepSpec, rows: &[SweepRow], cell: u32) -> GrayImage {
    let (nl, nt) = (
        spec.lambda_values.len() as u32,
        spec.theta_values.len() as u32,
    );
    GrayImage::from_fn(nt * cell, nl * cell, |x, y| {
        let (li, ti) = ((y / cell) as usize, (x / cell) as usize);
        let tc = rows
            .get(li * nt as usize + ti)
            .map(|r| r.tc.clamp(0.0, 1.0))
            .unwrap_or(0.0);
        Luma([(tc * 255.0).round() as u8])
    })
}

pub fn save_sweep_heatmap(
    spec: &SweepSpec,
    rows: &[SweepRow],
    path: impl AsRef<Path>,
) -> Result<()> {
    crate::io::save_png(&sweep_heatmap(spec, rows, 16), path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub noise: f64,
    pub smoothing_iterations: usize,
    pub tc: f64,
    pub iterations: usize,
    pub seconds: f64,
}

/// For each noise level, segments the synthetic with and without the
/// pre-smoother (`smoothing_iterations` of `distance` versus 0). Returns
/// pairs `(smoothed, unsmoothed)`.
pub fn noise_study(
    kind: SyntheticKind,
    size: usize,
    noise_levels: &[f64],
    seed: u64,
    params: &SolverParams,
    distance: &DistanceConfig,
) -> Result<Vec<(NoiseRow, NoiseRow)>> {
    if let Some(&bad) = noise_levels.iter().find(|&&s| !(0.0..=0.5).contains(&s)) {
        return Err(invalid("noise_levels", format!("{bad} outside [0, 0.5]")));
    }
    noise_levels
        .par_iter()
        .map(|&noise| {
            let syn = generate_synthetic(kind, size, noise, seed)?;
            let image = crate::grid::normalize(&syn.image);
            let run = |smoothing_iterations: usize| -> Result<NoiseRow> {
                let cfg = DistanceConfig {
                    smoothing_iterations,
                    ..*distance
                };
                let start = Instant::now();
                let bundle = DistanceBundle::build(&image, &syn.markers, &cfg)?;
                let r = segment(&image, &bundle, params, &image)?;
                Ok(NoiseRow {
                    noise,
                    smoothing_iterations,
                    tc: tanimoto(&r.mask, &syn.ground_truth)?,
                    iterations: r.iterations,
                    seconds: start.elapsed().as_secs_f64(),
                })
            };
            Ok((run(distance.smoothing_iterations)?, run(0)?))
        })
        .collect()
}

pub fn noise_csv_string(rows: &[(NoiseRow, NoiseRow)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (a, b) in rows {
        w.serialize(a)?;
        w.serialize(b)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
