//! Crate-wide error type.

use thiserror::Error;

use crate::geometry::Axis;

#[derive(Debug, Error)]
pub enum Error {
    /// The direction vector of a line is (numerically) zero.
    #[error("invalid line: direction vector is zero")]
    InvalidDirection,

    /// The line passes through the camera optical center (zero moment),
    /// where Plücker coordinates cannot represent it.
    #[error("degenerate line: moment vector is zero (line through the optical center)")]
    DegenerateLine,

    /// A constructed line violates the Plücker constraint set.
    #[error("invalid line: {0}")]
    InvalidLine(String),

    /// ||chi|| is too small to invert into a finite depth.
    #[error("depth overflow: ||chi|| = {chi_norm:.3e}, line at infinity")]
    DepthOverflow { chi_norm: f64 },

    /// The elimination denominator |h[axis]| collapsed.
    #[error("elimination singularity: |h[{axis}]| = {value:.3e}")]
    EliminationSingularity { axis: Axis, value: f64 },

    /// Multi-line aggregation over an empty list.
    #[error("cannot aggregate an empty list of eigen analyses")]
    EmptyAggregate,

    /// Scenario generation exhausted its rejection-sampling budget.
    #[error("scenario generation failed after {attempts} rejected draws")]
    GenerationFailed { attempts: usize },

    /// Configuration file or flag error.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) => 3,
            _ => 4,
        }
    }
}
