use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported element: {0}")]
    UnsupportedElement(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("degenerate element {element}: {reason}")]
    DegenerateElement { element: usize, reason: String },

    #[error("degenerate face: {0}")]
    DegenerateFace(String),

    #[error("mesh format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("non-conformal mesh: {0}")]
    Conformality(String),

    #[error("periodicity mismatch: {0}")]
    PeriodicityMismatch(String),

    #[error(transparent)]
    State(#[from] StateError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("step failure at iteration {iteration}, dof {dof}: {source}")]
    StepFailure {
        iteration: usize,
        dof: usize,
        #[source]
        source: StateError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// An inadmissible conservative state (negative density or pressure, or NaN).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("inadmissible state rho={rho}, m=({mx}, {my}), E={energy}{}", context_suffix(.element))]
pub struct StateError {
    pub rho: f64,
    pub mx: f64,
    pub my: f64,
    pub energy: f64,
    pub element: Option<usize>,
}

fn context_suffix(element: &Option<usize>) -> String {
    match element {
        Some(k) => format!(" in element {k}"),
        None => String::new(),
    }
}

impl StateError {
    pub fn in_element(mut self, element: usize) -> Self {
        self.element.get_or_insert(element);
        self
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::UnsupportedElement(_) => 2,
            Error::DegenerateMesh(_)
            | Error::DegenerateElement { .. }
            | Error::DegenerateFace(_)
            | Error::Format { .. }
            | Error::Conformality(_)
            | Error::PeriodicityMismatch(_) => 3,
            Error::State(_) | Error::StepFailure { .. } => 4,
            Error::Io { .. } => 2,
        }
    }
}
