use thiserror::Error;

use crate::credal::CoherenceReport;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e} exceeds tol_herm = {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("matrix is not unitary: max |U^H U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("projector {index} is invalid: {reason}")]
    NotProjector { index: usize, reason: String },
    #[error("projectors {first} and {second} are not orthogonal: max |P_i P_k| = {deviation:e}")]
    NotOrthogonal { first: usize, second: usize, deviation: f64 },
    #[error("projectors do not sum to the identity: max |sum P_i - I| = {deviation:e}")]
    NotComplete { deviation: f64 },
    #[error("payoff undefined for a projector of rank {rank}; rank one required")]
    RankNotOne { rank: usize },
    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },
    #[error("Born probability {index} is negative: {value:e}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("assessments incur a partial loss")]
    Incoherent(Box<CoherenceReport>),
    #[error("credal set is empty (constraint margin {margin:e})")]
    EmptyCredalSet { margin: f64 },
    #[error("credal set is not maximal: prevision spread {spread:e} on basis element {index}")]
    NotMaximal { index: usize, spread: f64 },
    #[error("conditioning undefined: lower probability {lower:e} is zero but upper probability {upper:e} is positive")]
    UndefinedConditioning { lower: f64, upper: f64 },
    #[error("operation not supported for this credal set representation: {0}")]
    Unsupported(String),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("assessments avoid partial loss; no Dutch book exists")]
    NotIncoherent,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("semidefinite solver failed: {0}")]
    SolverFailure(String),
    #[error("solver hit the iteration limit after {iterations} iterations (gap {gap:e})")]
    MaxIterations { iterations: usize, gap: f64 },
    #[error("bisection root not bracketed: h(lo) = {h_lo:e}, h(hi) = {h_hi:e}")]
    BracketFailure { h_lo: f64, h_hi: f64 },
    #[error("diagonal fast path limited to dimension 8, got {0}")]
    DimensionTooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
