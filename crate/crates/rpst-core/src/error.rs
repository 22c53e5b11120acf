use core::fmt;

/// Errors produced by the core operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The data contain tied observations and no jitter scale was configured.
    TiesWithoutJitter,
    /// A paired difference is exactly zero and no jitter scale was configured.
    ZeroDifference,
    /// The jitter scale is large enough to reorder distinct observations.
    JitterTooLarge { scale: f64, max_allowed: f64 },
    /// The modification zeroes too many ranks for the requested operation.
    QTooLarge { q_count: usize, n: usize },
    /// The transformed rank sequence has zero variance.
    DegenerateSequence,
    /// The null variance is zero, so no reference distribution exists.
    DegenerateVariance,
    /// `alpha` lies outside the validity window of the half-normal critical value.
    AlphaOutOfRange { alpha: f64, lower: f64 },
    /// An exhaustive enumeration would exceed the configured cap.
    TooLarge { required: u128, cap: u128 },
    /// A parameter is outside its domain.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TiesWithoutJitter => {
                write!(f, "tied observations present and no tie jitter configured")
            }
            Error::ZeroDifference => {
                write!(f, "a paired difference is zero and no tie jitter configured")
            }
            Error::JitterTooLarge { scale, max_allowed } => write!(
                f,
                "jitter scale {scale} could reorder distinct observations (must be below {max_allowed})"
            ),
            Error::QTooLarge { q_count, n } => {
                write!(f, "Q = {q_count} zeroes too many of the {n} ranks for this operation")
            }
            Error::DegenerateSequence => write!(f, "transformed rank sequence has zero variance"),
            Error::DegenerateVariance => write!(f, "null variance is zero"),
            Error::AlphaOutOfRange { alpha, lower } => write!(
                f,
                "alpha = {alpha} outside the validity window ({lower}, 0.5)"
            ),
            Error::TooLarge { required, cap } => {
                write!(f, "enumeration size {required} exceeds cap {cap}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
