use thiserror::Error;

use crate::ring::Frame;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("frame mismatch: {left:?} vs {right:?}")]
    FrameMismatch { left: Frame, right: Frame },

    #[error("not exact: {0}")]
    NotExact(String),

    #[error("substitution rule has no image for family {0}")]
    MissingRule(u32),

    #[error("cannot homogenize: monomial {0} would need a negative power of eps")]
    NegativeEpsPower(String),

    #[error("truncation window violation: order {needed} requested but only orders >= {valid_low} are exact")]
    WindowViolation { needed: i64, valid_low: i64 },

    #[error("linear system has no solution ({0})")]
    NoSolution(String),

    #[error("linear system has a {kernel_dim}-dimensional solution space ({context})")]
    NonUniqueSolution { kernel_dim: usize, context: String },

    #[error("not triangular: {0}")]
    NotTriangular(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
