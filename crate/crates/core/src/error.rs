use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel type error: {0}")]
    KernelType(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("kernel evaluation failed for pair ({i}, {j}): {source}")]
    KernelPair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid direction pair ({0}, {0})")]
    InvalidPair(usize),

    #[error("degenerate direction through samples {i} and {j}: squared norm {norm_sq:e}")]
    DegenerateDirection { i: usize, j: usize, norm_sq: f64 },

    #[error("no non-degenerate direction exists among {0} samples")]
    NoValidDirections(usize),

    #[error("outlyingness needs at least 3 samples, got {0}")]
    TooFewSamples(usize),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("solver did not converge after {iterations} pair updates (max KKT violation {max_violation:e})")]
    Convergence { iterations: u64, max_violation: f64 },

    #[error("group {label:+} is empty after trimming ({n} samples, kappa {kappa})")]
    GroupEmptyAfterTrim { label: i8, n: usize, kappa: f64 },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("label error at line {line}: {message}")]
    Label { line: usize, message: String },

    #[error("no label for record {0}")]
    MissingLabel(String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::KernelPair { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the error comes from bad user input (flags, files) rather than
    /// from the computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidParameter { .. }
                | Error::Parse { .. }
                | Error::Label { .. }
                | Error::MissingLabel(_)
                | Error::DuplicateId(_)
                | Error::Io { .. }
                | Error::KernelType(_)
                | Error::Dimension { .. }
        )
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
