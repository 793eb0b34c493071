use thiserror::Error;

/// Errors raised by the construction, verification and tomography routines.
///
/// Measurement and outcome labels carried by variants are 1-based, the same
/// labels used in reports and serialized documents.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MumError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid dimension {0}: need d >= {1}")]
    InvalidDimension(usize, usize),

    #[error("matrix is not Hermitian (max |A - A^H| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix shape is not square: {rows} rows, {len} entries")]
    BadShape { rows: usize, len: usize },

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})"
    )]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("rank {rank} out of range 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid operator basis: {0}")]
    InvalidBasis(String),

    #[error("invalid grid mapping: {0}")]
    InvalidMapping(String),

    #[error(
        "t = {t} outside admissible range [{t_lo}, {t_hi}]: P(b={b}, n={n}) has eigenvalue {eigenvalue:e}"
    )]
    TOutOfRange {
        t: f64,
        t_lo: f64,
        t_hi: f64,
        b: usize,
        n: usize,
        eigenvalue: f64,
    },

    #[error("kappa = {kappa} outside ({lo}, {hi}]")]
    KappaOutOfRange { kappa: f64, lo: f64, hi: f64 },

    #[error("singular frame: kappa = {kappa} does not exceed 1/d = {inv_d}")]
    SingularFrame { kappa: f64, inv_d: f64 },

    #[error("invalid measurement set: {0}")]
    InvalidMeasurement(String),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("state is not pure: Tr(rho^2) = {purity}")]
    NotPure { purity: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("malformed document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, MumError>;
