use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("pixel buffer holds {actual} pixels, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("degenerate ellipse: {0}")]
    DegenerateEllipse(String),

    #[error("ellipse bounding box does not intersect the image")]
    EmptyCrop,

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("not an ellipse: {0}")]
    NotAnEllipse(String),

    #[error("implausible field of view: ellipse covers {fraction:.3} of the image")]
    ImplausibleFov { fraction: f64 },

    #[error("{path}:{line}: {message}")]
    Manifest { path: PathBuf, line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("label {0} is not a binary class label")]
    InvalidLabel(i64),

    #[error("unrecognized format")]
    UnrecognizedFormat,

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated file")]
    Truncated,

    #[error("degenerate labels: both classes are required")]
    DegenerateLabels,

    #[error("variance undefined: need at least 2 cases per class")]
    VarianceUndefined,

    #[error("undefined kappa: chance agreement is 1")]
    UndefinedKappa,

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
