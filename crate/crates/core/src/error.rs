use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("characteristic two is not supported (p = {0})")]
    CharTwo(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size {size} exceeds the configured cap {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("twist 0 gives the trivial character")]
    TrivialTwist,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad set spec `{spec}`: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("table has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("closed-form sphere transform needs even dimension, got d = {0}")]
    OddDimension(usize),
    #[error("surface measure needs a sphere radius")]
    MissingSphere,
    #[error("sphere S_{0} is empty")]
    EmptySphere(u32),
    #[error("rounding residual {residual} at index {index} exceeds 0.5")]
    RoundingOverflow { index: usize, residual: f64 },
    #[error("direct and spectral counts disagree at t = {t}: {direct} vs {spectral}")]
    MethodMismatch { t: u32, direct: u64, spectral: u64 },
    #[error("|E|^k = {0}^{1} does not fit the 63-bit count budget")]
    CountOverflow(usize, u32),
    #[error("empty point set")]
    DegenerateSet,
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("hypothesis not met: {0}")]
    HypothesisFail(String),
    #[error("radius t = 0 is excluded")]
    ZeroRadius,
    #[error("k must be at least 2, got {0}")]
    BadOrder(u32),
}

impl Error {
    /// The variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CharTwo(_) => "CharTwo",
            Error::NotPrime(_) => "NotPrime",
            Error::TooLarge { .. } => "TooLarge",
            Error::TrivialTwist => "TrivialTwist",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::BadSpec { .. } => "BadSpec",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::OddDimension(_) => "OddDimension",
            Error::MissingSphere => "MissingSphere",
            Error::EmptySphere(_) => "EmptySphere",
            Error::RoundingOverflow { .. } => "RoundingOverflow",
            Error::MethodMismatch { .. } => "MethodMismatch",
            Error::CountOverflow(..) => "CountOverflow",
            Error::DegenerateSet => "DegenerateSet",
            Error::BadDimension(_) => "BadDimension",
            Error::HypothesisFail(_) => "HypothesisFail",
            Error::ZeroRadius => "ZeroRadius",
            Error::BadOrder(_) => "BadOrder",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
