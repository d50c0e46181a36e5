use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the evaluation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("PNG decode failed: {0}")]
    PngDecode(String),

    #[error("PNG encode failed: {0}")]
    PngEncode(String),

    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),

    #[error("unsupported PNG color type {0}; expected single-channel grayscale")]
    UnsupportedColorType(String),

    #[error("MGRID header mismatch: {0}")]
    MgridHeader(String),

    #[error("payload length mismatch: header declares {expected} bytes, file carries {actual}")]
    PayloadLength { expected: usize, actual: usize },

    #[error("PNG supports 2D only (mask has {0} axes)")]
    PngNot2d(usize),

    #[error("label {label} exceeds {bits}-bit depth")]
    LabelExceedsDepth { label: u16, bits: u8 },

    #[error("unrecognized mask format for {0}")]
    UnknownFormat(PathBuf),

    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),

    #[error("class list is empty")]
    EmptyClassList,

    #[error("duplicate class id {0}")]
    DuplicateClass(u16),

    #[error("invalid class catalog: {0}")]
    InvalidCatalog(String),

    #[error("no element carries class {0} (empty reference set)")]
    EmptyReference(u16),

    #[error("point set is empty")]
    EmptySet,

    #[error("probability {value} at index {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f32 },

    #[error("invalid threshold list: {0}")]
    InvalidThresholds(String),

    #[error("ROC curve undefined: ground truth has no {0}")]
    DegenerateRoc(&'static str),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("averaging policy mode is {found}, operation requires {required}")]
    WrongAveragingMode {
        required: &'static str,
        found: &'static str,
    },

    #[error("random scenario requires an explicit seed")]
    MissingSeed,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no palette color for class {0}")]
    MissingPalette(u16),

    #[error("invalid overlay: {0}")]
    InvalidOverlay(String),

    #[error("nothing to plot: {0}")]
    EmptyPlotData(&'static str),

    #[error("every sample failed to evaluate")]
    AllSamplesFailed,

    #[error("dataset has no sample pairs")]
    NoPairs,

    #[error("duplicate sample id {0}")]
    DuplicateSample(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
