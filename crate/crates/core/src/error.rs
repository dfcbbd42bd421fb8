//! Error type shared across the crate.
//!
//! Variants mirror the failure modes of the pipeline stages: file parsing,
//! input validation, mathematical domain violations, mesh construction, and
//! iterative solver breakdown. Exit-code policy (0 ok / 1 partial / 2 config)
//! lives in the CLI, not here.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file; carries the 1-based line number and offending field.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally well-formed input that violates a consistency requirement
    /// (e.g. a face glued twice; the message names both gluings).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Metric mesh construction failed; names the offending cell when known.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// Iterative solver exceeded its iteration cap.
    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },

    /// A condition that should be impossible for well-posed input.
    #[error("internal error: {0}")]
    Internal(String),

    /// Recognized but deliberately unimplemented functionality.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
