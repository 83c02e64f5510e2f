use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("field length {found} does not match grid with {expected} interior points")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("inverse power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-finite state after step {step}")]
    BlowUp { step: usize },

    #[error("degenerate initial data: V(0) = {v0:e}, the trigger threshold would vanish")]
    DegenerateInitialData { v0: f64 },

    #[error("degenerate run: {0}")]
    DegenerateRun(String),

    #[error("Poincare constant C_omega = {c_omega} violates the hypothesis C_omega < sqrt(2)")]
    InfeasibleDomain { c_omega: f64 },

    #[error("no feasible epsilon after {iterations} shrink iterations: {trace}")]
    DesignFailure { iterations: usize, trace: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("run record carries no stability certificate")]
    MissingCertificate,
}
