use std::fmt;
use std::path::PathBuf;

/// Harness-level failures, each mapped to a process exit code:
/// usage errors exit 1, data errors exit 2, numerical failures exit 3.
#[derive(Debug)]
pub enum HarnessError {
    Usage(String),
    Data {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Numerical(slrm_core::Error),
}

impl HarnessError {
    pub fn usage(message: impl Into<String>) -> Self {
        HarnessError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        HarnessError::Data {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn data_at(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        HarnessError::Data {
            path: Some(path.to_path_buf()),
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Data { .. } | HarnessError::Io { .. } => 2,
            HarnessError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(m) => write!(f, "usage error: {m}"),
            HarnessError::Data { path, line, message } => {
                write!(f, "data error")?;
                if let Some(p) = path {
                    write!(f, " in {}", p.display())?;
                }
                if let Some(l) = line {
                    write!(f, " at line {l}")?;
                }
                write!(f, ": {message}")
            }
            HarnessError::Io { path, source } => {
                write!(f, "io error on {}: {source}", path.display())
            }
            HarnessError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<slrm_core::Error> for HarnessError {
    fn from(e: slrm_core::Error) -> Self {
        use slrm_core::Error as E;
        match e {
            E::InvalidParam { .. } => HarnessError::Usage(e.to_string()),
            E::RankDeficient { .. } | E::NotSymmetric { .. } => HarnessError::Numerical(e),
            E::DimensionMismatch { .. }
            | E::RankTooSmall { .. }
            | E::UnlabeledSample { .. }
            | E::EmptyDataset
            | E::NotOrthonormal { .. } => HarnessError::Data {
                path: None,
                line: None,
                message: e.to_string(),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
