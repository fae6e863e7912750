use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("multiplier is not Hermitian at wavenumber {k}: m(-k) = {lhs}, conj(m(k)) = {rhs}")]
    SymmetryViolation { k: i64, lhs: String, rhs: String },

    #[error("grid mismatch: ({m1}, {k1}) vs ({m2}, {k2})")]
    GridMismatch { m1: usize, k1: usize, m2: usize, k2: usize },

    #[error("invalid Besov exponents: {0}")]
    InvalidBesov(String),

    #[error("truncation level {n} exceeds the sampled range 1..={k_max}")]
    Level { n: usize, k_max: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("paracontrolled level mismatch: {0}")]
    LevelMismatch(String),

    #[error("fixed point for the domain map did not contract at cutoff {cutoff} (last step {last_step:.3e}); use a larger cutoff")]
    Threshold { cutoff: usize, last_step: f64 },

    #[error("no cutoff below level {n} makes the control map a contraction")]
    NoiseLevelTooSmall { n: usize },

    #[error("iterative solver stagnated after {iterations} iterations at relative residual {residual:.3e}")]
    Conditioning { iterations: usize, residual: f64 },

    #[error("weight e^(2W) is not resolved: relative tail {tail:.3e} on a grid of {m} points")]
    WeightTail { tail: f64, m: usize },

    #[error("eigensolver failure: {0}")]
    Solver(String),

    #[error("time step {dt:.3e} violates the stability rule dt <= {bound:.3e}")]
    Stability { dt: f64, bound: f64 },

    #[error("Gaussian bound violated at t = {t}, x = {x}, y = {y}")]
    BoundViolation { t: f64, x: f64, y: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
