use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polytope is unbounded (nontrivial recession cone)")]
    UnboundedPolytope,
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("polytope is not full-dimensional: {0}")]
    DegeneratePolytope(String),
    #[error("extra halfspace {index} cuts the base polytope at eps = 0")]
    InvalidPerturbation { index: usize },
    #[error("simplex is degenerate")]
    DegenerateSimplex,
    #[error("triangulation does not refine the linearity domains of the function (simplex {simplex})")]
    TriangulationTooCoarse { simplex: usize },
    #[error("gram matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("weight is not positive: {0}")]
    WeightNotPositive(String),
    #[error("linear system is singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },
    #[error("point is not in the interior of the polytope")]
    PointNotInterior,
    #[error("lattice enumeration too large: {points} points exceeds {limit}")]
    LatticeTooLarge { points: u128, limit: u128 },
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True when the failure is attributable to user-supplied data rather than
    /// to the solver itself.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::LpInfeasible | Error::LpUnbounded | Error::SingularSystem { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
