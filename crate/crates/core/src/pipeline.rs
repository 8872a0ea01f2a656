//! End-to-end runs shared by the command line and the HTTP service.

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceBundle, DistanceConfig, MarkerSet};
use crate::error::Result;
use crate::grid::{normalize, ScalarGrid};
use crate::solver::{segment, SegmentationResult, SolverParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub distance: DistanceConfig,
    pub solver: SolverParams,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// The min-max normalized input.
    pub image: ScalarGrid,
    pub bundle: DistanceBundle,
    pub result: SegmentationResult,
}

/// Normalizes `raw`, builds the distance bundle and segments starting from
/// `u_init` (the normalized image when `None`).
pub fn run_pipeline(
    raw: &ScalarGrid,
    markers: &MarkerSet,
    cfg: &PipelineConfig,
    u_init: Option<&ScalarGrid>,
) -> Result<PipelineOutput> {
    cfg.solver.validate()?;
    let image = normalize(raw);
    let bundle = DistanceBundle::build(&image, markers, &cfg.distance)?;
    let result = segment(&image, &bundle, &cfg.solver, u_init.unwrap_or(&image))?;
    Ok(PipelineOutput {
        image,
        bundle,
        result,
    })
}
