//! Error type shared by the model, metrics and optimizer modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The transmit covariance cannot be inverted, so the echo channel is not
    /// fully estimable.
    #[error("singular transmit covariance (min eigenvalue {min_eig:.3e})")]
    SingularCovariance { min_eig: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// A secrecy rate was requested with no eavesdropping targets.
    #[error("no targets supplied")]
    EmptyTargets,

    /// A target must consist of at least one scatterer.
    #[error("target has no scatterers")]
    EmptyScatterers,

    /// No strictly feasible point exists (or none could be found) for the
    /// requested constraint set.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("Newton iteration limit reached ({steps} steps)")]
    MaxIterations { steps: usize },

    /// Communication-and-sensing power already exceeds the total budget.
    #[error("power budget exceeded: P_cs = {p_cs:.6} W > P_t = {p_t:.6} W")]
    BudgetExceeded { p_cs: f64, p_t: f64 },

    /// The probing matrix of the estimation experiment is too ill-conditioned
    /// for a least-squares fit.
    #[error("singular design matrix (condition number {cond:.3e})")]
    SingularDesign { cond: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
