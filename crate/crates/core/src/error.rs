use std::fmt;

/// Errors produced by the solvers and model types.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must agree in size do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A matrix that must have full column rank is numerically rank
    /// deficient; carries the smallest/largest singular-value ratio.
    RankDeficient { ratio: f64 },
    /// Requested more directions than the data supports.
    RankTooSmall { requested: usize, achievable: usize },
    /// A matrix that must be symmetric is not.
    NotSymmetric { max_asymmetry: f64 },
    /// A hyperparameter or bound parameter is outside its valid range.
    InvalidParam { name: &'static str, message: String },
    /// An operation that needs labels met a sample without one.
    UnlabeledSample { index: Option<usize> },
    /// An operation that needs data received an empty dataset.
    EmptyDataset,
    /// A basis that must have orthonormal columns does not.
    NotOrthonormal { deviation: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "dimension mismatch for {what}: expected {expected}, got {got}"),
            Error::RankDeficient { ratio } => write!(
                f,
                "matrix is numerically rank deficient (singular-value ratio {ratio:.3e})"
            ),
            Error::RankTooSmall {
                requested,
                achievable,
            } => write!(
                f,
                "requested rank {requested} exceeds achievable rank {achievable}"
            ),
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")
            }
            Error::InvalidParam { name, message } => {
                write!(f, "invalid parameter {name}: {message}")
            }
            Error::UnlabeledSample { index: Some(i) } => {
                write!(f, "sample {i} has no label")
            }
            Error::UnlabeledSample { index: None } => write!(f, "sample has no label"),
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "basis columns are not orthonormal (deviation {deviation:.3e})")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        message: message.into(),
    }
}
