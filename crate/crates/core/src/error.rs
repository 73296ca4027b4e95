use thiserror::Error;

pub type Result<T> = std::result::Result<T, GppaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GppaError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate levels {n} and {m} at t = {t} (gap {gap:e})")]
    Degenerate { n: String, m: String, t: f64, gap: f64 },
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("aliasing: {samples} samples cannot resolve nu_max = {nu_max}")]
    Aliasing { samples: usize, nu_max: usize },
    #[error("unresolved pole: denominator {denominator:e} for state {state}")]
    UnresolvedPole { state: String, denominator: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("no fixed point: {0}")]
    NoFixedPoint(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}

impl GppaError {
    /// Process exit code for the CLI: 2 for validation, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            GppaError::Invalid(_) | GppaError::Validation(_) => 2,
            _ => 3,
        }
    }
}
