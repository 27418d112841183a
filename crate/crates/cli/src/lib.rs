//! Problem files, reports and command implementations behind the
//! `tropcount` binary.

pub mod problem_file;
pub mod report;

use thiserror::Error;

pub use problem_file::{emit_problem, parse_problem};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{context}: {source}")]
    Semantic { context: String, source: tropcount::Error },
    #[error(transparent)]
    Engine(#[from] tropcount::Error),
}

impl CliError {
    fn within(self, outer: String) -> CliError {
        match self {
            CliError::Syntax(m) => CliError::Syntax(format!("{outer}: {m}")),
            CliError::Semantic { context, source } => CliError::Semantic { context: format!("{outer}, {context}"), source },
            other => other,
        }
    }

    fn engine_error(&self) -> Option<&tropcount::Error> {
        match self {
            CliError::Semantic { source, .. } | CliError::Engine(source) => Some(source),
            _ => None,
        }
    }

    /// Process exit status: 2 for unreadable or invalid input, 3 when the
    /// constraints are not general, 4 for a dimension mismatch, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use tropcount::Error as E;
        match self.engine_error() {
            Some(E::DimensionMismatch { .. }) => 4,
            Some(E::NonGeneric(_) | E::NonRigid(_)) => 3,
            Some(E::Unsupported(_) | E::Linalg(_)) => 1,
            Some(_) => 2,
            None => match self {
                CliError::Io { .. } | CliError::Syntax(_) => 2,
                _ => 1,
            },
        }
    }
}
