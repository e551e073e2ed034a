//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by net construction, transformation, and validation.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix determinant below the singularity threshold.
    #[error("singular matrix: |det| = {0:.3e}")]
    SingularMatrix(f64),

    /// A vector extracted from a biquaternion had a nonreal imaginary part.
    #[error("trace-free part is not a real vector (imaginary residue {0:.3e})")]
    NonRealImage(f64),

    /// tan or cot of a half-angle overflowed.
    #[error("degenerate angle {0}")]
    DegenerateAngle(f64),

    /// A quad was too degenerate for curvature evaluation.
    #[error("degenerate quad: {0}")]
    DegenerateQuad(String),

    /// An evolution denominator vanished; the payload names the quantity.
    #[error("degenerate evolution: denominator of {0} vanished")]
    DegenerateEvolution(&'static str),

    /// Lax field fails the zero-curvature condition.
    #[error("incompatible Lax field: residual {residual:.3e} at quad ({k},{l})")]
    IncompatibleField { k: usize, l: usize, residual: f64 },

    /// The radicand of the edge-variable length formula was negative.
    #[error("negative radicand {0:.3e} in edge-variable length")]
    NegativeRadicand(f64),

    /// Quad vertices do not lie on one circle.
    #[error("vertices not concircular (deviation {0:.3e})")]
    NonConcircular(f64),

    /// Cross-ratio evaluation hit coincident vertices.
    #[error("coincident vertices at quad ({0},{1})")]
    CoincidentVertices(usize, usize),

    /// An edge has near-zero length.
    #[error("zero-length edge at ({0},{1})")]
    ZeroEdge(usize, usize),

    /// Lattice tangents at the anchor vertex do not span a frame.
    #[error("degenerate frame: {0}")]
    DegenerateFrame(&'static str),

    /// The folded-parallelogram step of the Darboux construction failed.
    #[error("no solution in Darboux fold at vertex {0}")]
    NoSolution(usize),

    /// Tractrix step outside (0, 2).
    #[error("invalid tractrix step epsilon = {0}")]
    InvalidStep(f64),

    /// A stored net violates a structural invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Array lengths inconsistent with the declared dims.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// File contents failed to parse.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    IoError(#[from] std::io::Error),

    /// Parameter set does not match the requested generator.
    #[error("unknown or invalid parameter: {0}")]
    UnknownParameter(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
