use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid covariance: {0}")]
    InvalidCovariance(&'static str),
    #[error("invalid block partition")]
    InvalidPartition,
    #[error("conditioning block is singular")]
    SingularBlock,
    #[error("demonstration is already in the search frame")]
    AlreadyAligned,
    #[error("demonstration is not aligned to the search frame")]
    NotAligned,
    #[error("demonstrations have mixed dimensions")]
    MixedDimensions,
    #[error("invalid demonstration: {0}")]
    InvalidDemonstration(String),
    #[error("scripted demonstration never entered the goal region")]
    ScriptFailed,
    #[error("bad Savitzky-Golay parameters: window {window}, order {order}")]
    BadFilterParams { window: usize, order: usize },
    #[error("too few training rows: {rows} < {needed}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("exploration mass inside the spectral box is {mass:.4} < 0.99")]
    MassOutsideBounds { mass: f64 },
    #[error("trajectory has no feed-forward wrench")]
    UnannotatedTrajectory,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical kind (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularBlock | Error::InvalidCovariance(_) | Error::MassOutsideBounds { .. }
        )
    }
}
