use std::fmt;

use thiserror::Error;

/// Which half of a refinement iteration a failure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    Fine,
    Coarse,
    Combine,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Init => "init",
            Phase::Fine => "fine",
            Phase::Coarse => "coarse",
            Phase::Combine => "combine",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    Numeric(String),

    #[error("schedule orientation: alpha_bar must increase from u={u} to u={u_next}")]
    Orientation { u: f64, u_next: f64 },

    #[error("fine index out of range: {0}")]
    Index(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{phase} solve failed in block {block}, iteration {iter}: {source}")]
    Solve {
        block: usize,
        iter: usize,
        phase: Phase,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_block(self, block: usize, iter: usize, phase: Phase) -> Self {
        Error::Solve {
            block,
            iter,
            phase,
            source: Box::new(self),
        }
    }

    /// Process exit code used by the CLI: 2 config, 3 numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::Unsupported(_) | Error::Shape { .. } => 2,
            Error::Io { .. } => 4,
            Error::Solve { source, .. } => source.exit_code(),
            Error::Domain(_) | Error::Numeric(_) | Error::Orientation { .. } | Error::Index(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
