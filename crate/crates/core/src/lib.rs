//! Selective image segmentation with a convex geodesic model.
//!
//! A user marks a few pixels inside the object of interest (and optionally
//! inside objects to exclude). Edge-weighted geodesic distances from those
//! markers penalize a convex two-phase fitting energy, which is minimized
//! over a relaxed indicator `u ∈ [0, 1]` by a semi-implicit additive
//! operator splitting scheme. Thresholding `u` gives the mask.
//!
//! ```no_run
//! use geoseg::{io, run_pipeline, MarkerSet, GridIndex, PipelineConfig};
//!
//! let raw = io::load_image("scan.png")?;
//! let markers = MarkerSet::new(vec![GridIndex::new(40, 52)], vec![]);
//! let out = run_pipeline(&raw, &markers, &PipelineConfig::default(), None)?;
//! io::save_mask_png(&out.result.mask, "mask.png")?;
//! # Ok::<(), geoseg::Error>(())
//! ```

pub mod distance;
pub mod error;
pub mod eval;
pub mod grid;
pub mod io;
pub mod pipeline;
pub mod smoothing;
pub mod solver;

pub use distance::{DistanceBundle, DistanceConfig, MarkerSet};
pub use error::{Error, Result};
pub use eval::{generate_synthetic, tanimoto, Synthetic, SyntheticKind};
pub use grid::{normalize, GridIndex, GridShape, Mask, ScalarGrid};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use smoothing::{gauss_seidel_smooth, SmootherParams};
pub use solver::{segment, threshold, Mode, SegmentationResult, SolverParams};
