use std::path::PathBuf;

/// Errors produced by the segmentation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid must be at least 2x2, got {width}x{height}")]
    GridTooSmall { width: usize, height: usize },

    #[error("grid value count {got} does not match {width}x{height}")]
    GridLength {
        width: usize,
        height: usize,
        got: usize,
    },

    #[error("grid contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid grid spacing ({0}, {1})")]
    InvalidSpacing(f64, f64),

    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),

    #[error("empty marker set")]
    EmptyMarkers,

    #[error("marker ({i}, {j}) is outside the {width}x{height} image")]
    MarkerOutOfBounds {
        i: usize,
        j: usize,
        width: usize,
        height: usize,
    },

    #[error("pixel ({i}, {j}) is both a marker and an anti-marker")]
    MarkerConflict { i: usize, j: usize },

    #[error("degenerate cost field: value {value} at index {index}")]
    DegenerateCost { index: usize, value: f64 },

    #[error("degenerate region: integral {0:e} below threshold")]
    DegenerateRegion(f64),

    #[error("empty foreground/background at initialization")]
    EmptyRegion,

    #[error("singular line system at row {0}")]
    SingularLineSystem(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("synthetic image size must be at least 32, got {0}")]
    SyntheticTooSmall(usize),

    #[error("failed to read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("image encoding failed: {0}")]
    ImageEncode(#[from] image::ImageError),

    #[error("invalid markers document: {0}")]
    MarkersJson(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
