use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("buffer length {got} does not match {width}x{height}x{channels}")]
    BufferLength {
        width: usize,
        height: usize,
        channels: usize,
        got: usize,
    },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mask sample {value} at index {index} is outside [0, 1]")]
    MaskRange { index: usize, value: f32 },

    #[error("crop box violates bound `{bound}`: {value} vs limit {limit}")]
    CropOutOfBounds {
        bound: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed {format} data: {reason}")]
    Malformed {
        format: &'static str,
        reason: String,
    },

    #[error("silhouette corpus is empty")]
    EmptyCorpus,

    #[error("light {index} is not an active light of the rig")]
    InactiveLight { index: usize },

    #[error("weight on light {index} but the scan has no image for it")]
    MissingLight { index: usize },

    #[error("landmarks {first} and {second} coincide")]
    CoincidentLandmarks { first: usize, second: usize },

    #[error("mirror table is not an involution at vertex {index}")]
    MirrorNotInvolution { index: usize },

    #[error("landmark {index} at ({u}, {v}) lies outside the {width}x{height} image")]
    LandmarkOutOfBounds {
        index: usize,
        u: f64,
        v: f64,
        width: usize,
        height: usize,
    },

    #[error("degenerate correspondences: {0}")]
    DegenerateCorrespondences(String),

    #[error("homography is singular")]
    SingularHomography,

    #[error("image {width}x{height} is smaller than the {min}x{min} window")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("no candidates to choose from")]
    NoCandidates,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
