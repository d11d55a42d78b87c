use thiserror::Error;

use crate::io::FormatError;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("zero pivot at elimination step {step}; requested {requested} steps")]
    RankDeficient { step: usize, requested: usize },

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid degree: {0}")]
    Degree(String),

    #[error("no rank gap: all diagnostics are equal, supply an explicit threshold")]
    NoGap,

    #[error("ambiguous rank: {0}")]
    AmbiguousRank(String),

    #[error(
        "assumption violated: leading {rank}x{rank} trace block is not regular \
         (condition estimate {condition:.3e}); try a smaller candidate rank"
    )]
    AssumptionViolation { rank: usize, condition: f64 },

    #[error("basis is not a valid quotient basis for these points (condition estimate {condition:.3e})")]
    BasisNotValid { condition: f64 },

    #[error("random combination is defective after {attempts} attempts (eigenvector condition {condition:.3e})")]
    DefectiveCombination { attempts: usize, condition: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Format(#[from] FormatError),
}

impl Error {
    /// True for failures of the numerical method itself, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::RankDeficient { .. }
                | Error::Singular { .. }
                | Error::NoConvergence(_)
                | Error::NoGap
                | Error::AmbiguousRank(_)
                | Error::AssumptionViolation { .. }
                | Error::BasisNotValid { .. }
                | Error::DefectiveCombination { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
