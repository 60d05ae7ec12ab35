use thiserror::Error;

use crate::fusion::ConditionCheck;
use crate::stc::ReadinessFailure;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trace mismatch: sum of squared norms minus sum of eigenvalues is {gap}")]
    TraceMismatch { gap: f64 },

    #[error("ordering is not spectral tetris ready: {0}")]
    NotReady(ReadinessFailure),

    #[error("no 2x2 block for x = {x}, squared norms ({left}, {right}): {reason}")]
    Inadmissible {
        x: f64,
        left: f64,
        right: f64,
        reason: &'static str,
    },

    #[error("no ordering is spectral tetris ready ({orderings} orderings checked exhaustively)")]
    ProvenNotReady { orderings: usize },

    #[error("no ready ordering found within the search budget ({tried} orderings tried)")]
    SearchBudgetExhausted { tried: usize },

    #[error("reordering preconditions fail: {0}")]
    ReorderPrecondition(String),

    #[error("construction stuck at row {row}, column {column}: {detail}")]
    CursorStuck {
        row: usize,
        column: usize,
        detail: String,
    },

    #[error("reordering stuck at row {row}, column {column}: {detail}")]
    ReorderStuck {
        row: usize,
        column: usize,
        detail: String,
    },

    #[error("construction conditions violated: {}", describe_conditions(.0))]
    ConditionsViolated(Vec<ConditionCheck>),

    #[error("part {part}: columns {first} and {second} are not orthogonal (inner product {inner})")]
    NonOrthogonalPart {
        part: usize,
        first: usize,
        second: usize,
        inner: f64,
    },

    #[error("part {part}: column {column} has squared norm {norm_sq}, expected {expected}")]
    NormMismatch {
        part: usize,
        column: usize,
        norm_sq: f64,
        expected: f64,
    },

    #[error("part {part} is not a tight frame for its span (deviation {deviation})")]
    NonTightPart { part: usize, deviation: f64 },

    #[error("columns {first} and {second} of subspace {label} share a row")]
    WindowConflict {
        label: usize,
        first: usize,
        second: usize,
    },

    #[error("part {part} is degenerate: {detail}")]
    DegeneratePart { part: usize, detail: String },

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {deviation})")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("internal defect: {0}")]
    Defect(String),
}

/// Coarse classification used for reporting and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Infeasible,
    Budget,
    Defect,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::NotSymmetric { .. } => ErrorKind::Input,
            Error::SearchBudgetExhausted { .. } => ErrorKind::Budget,
            Error::Defect(_) | Error::NoConvergence { .. } => ErrorKind::Defect,
            _ => ErrorKind::Infeasible,
        }
    }
}

fn describe_conditions(checks: &[ConditionCheck]) -> String {
    checks
        .iter()
        .filter(|c| !c.satisfied)
        .map(|c| match c.margin {
            Some(m) => format!("{} (margin {m})", c.name),
            None => c.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
