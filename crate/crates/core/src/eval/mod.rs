//! Segmentation quality metrics, synthetic images and parameter studies.

mod metrics;
mod sweep;
mod synthetic;

pub use metrics::tanimoto;
pub use sweep::{
    noise_csv_string, noise_study, parameter_sweep, save_sweep_heatmap, sweep_csv_string,
    sweep_heatmap, sweep_points, NoiseRow, SweepRow, SweepSpec,
};
pub use synthetic::{generate_synthetic, Synthetic, SyntheticKind};
