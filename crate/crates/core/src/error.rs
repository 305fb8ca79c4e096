use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symplectic relations violated (residual {0:.3e})")]
    SpRelationViolated(f64),
    #[error("coordinate change is not unitary (residual {0:.3e})")]
    NonUnitary(f64),
    #[error("square-root branch jumps by {0:.3} rad in one continuation step")]
    BranchDiscontinuity(f64),
    #[error("not a point of the Siegel upper half-space: {0}")]
    InvalidSiegelPoint(String),
    #[error("combined quadratic form is not integrable")]
    NotIntegrable,
    #[error("sections are expressed in different frames")]
    FrameMismatch,
    #[error("sections belong to different polarizations")]
    PolarizationMismatch,
    #[error("Lagrangian subspaces are not transverse (|det| = {0:.3e})")]
    NonTransverse(f64),
    #[error("quadrature grid too coarse: refinement changed the result by {change:.3e} (tolerance {tolerance:.3e})")]
    GridTooCoarse { change: f64, tolerance: f64 },
    #[error("Fock truncation overflow: amplitude {0:.3e} in the top of the basis")]
    TruncationOverflow(f64),
    #[error("geodesic has no boundary limit (some rate vanishes)")]
    NoBoundaryLimit,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
