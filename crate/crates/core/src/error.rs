use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid multi-index {axes:?} for ambient dimension {ambient}: {reason}")]
    InvalidMultiIndex {
        axes: Vec<usize>,
        ambient: usize,
        reason: &'static str,
    },

    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("degree {degree} exceeds ambient dimension {ambient}")]
    DegreeOverflow { degree: usize, ambient: usize },

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("the zero form has no comass maximizer")]
    ZeroForm,

    #[error("comass estimate {0} is too small to normalize by")]
    VanishingComass(f64),

    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),

    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParameters { name: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region is empty or degenerate")]
    EmptyRegion,

    #[error("sample set does not span R^{dim} (rank {rank})")]
    DegenerateSample { dim: usize, rank: usize },

    #[error("grid node {point:?} lies within {margin} of the zero set of the differential")]
    ZeroSetProximity { point: Vec<f64>, margin: f64 },

    #[error("image diameter estimate vanishes; the map is constant on the sampled ball")]
    ConstantMap,

    #[error("profile too short: needs radii spanning {needed} doublings, spans {spanned:.3}")]
    ProfileTooShort { needed: usize, spanned: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
