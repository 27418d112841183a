use thiserror::Error;

use crate::linalg::LinalgError;
use crate::tropical::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("invalid combinatorial type: {}", format_violations(.0))]
    InvalidType(Vec<Violation>),
    #[error("vertex {vertex} has negative over-valence")]
    NegativeOverValence { vertex: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("dimension mismatch: codimensions plus psi exponents sum to {lhs}, expected dimension is {rhs}")]
    DimensionMismatch { lhs: i64, rhs: i64 },
    #[error("psi condition not an equality at vertex {vertex}: over-valence {over_valence}, psi sum {psi_sum}")]
    PsiMismatch { vertex: usize, over_valence: u64, psi_sum: u64 },
    #[error("constraints are not in general position: {0}")]
    NonGeneric(String),
    #[error("type is not rigid: {0}")]
    NonRigid(String),
    #[error("empty partition")]
    EmptyPartition,
    #[error("partitions have different sizes: {left} and {right}")]
    MismatchedDegree { left: u64, right: u64 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
