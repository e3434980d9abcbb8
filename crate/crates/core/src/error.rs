use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid operator basis: {0}")]
    InvalidBasis(String),

    #[error("time {t} outside the model horizon [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("hamiltonian not Hermitian at t = {t} (deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },

    #[error("ill-conditioned Jordan structure near eigenvalue {eigenvalue}: {detail}")]
    Decomposition {
        eigenvalue: Complex64,
        detail: String,
    },

    #[error("eigenvalue crossing or block-structure change at s = {s}")]
    Crossing { s: f64 },

    #[error("ambiguous spectral tracking at s = {s}: {detail}")]
    Tracking { s: f64, detail: String },

    #[error("gap between blocks {alpha} and {beta} vanishes at s = {s:?}")]
    GapDegenerate {
        alpha: usize,
        beta: usize,
        s: Vec<f64>,
    },

    #[error("s = {s} outside the trajectory range [{lo}, {hi}]")]
    OutsideGrid { s: f64, lo: f64, hi: f64 },

    #[error("s = {s} is not a grid point of the trajectory")]
    OffGrid { s: f64 },

    #[error("propagator of the wrong kind: {0}")]
    WrongKind(String),

    #[error("block coefficients violate the shift constraint (residual {residual:e})")]
    Coefficient { residual: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("logarithm undefined: eigenvalue {eigenvalue:e} below floor")]
    LogDomain { eigenvalue: f64 },

    #[error("analytic spectrum degenerate at t = {t}")]
    SpectrumDegenerate { t: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}
