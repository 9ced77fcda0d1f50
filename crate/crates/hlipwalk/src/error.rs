use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or solver was handed a parameter outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An input value violates a precondition of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An iterative routine failed to converge or hit a singular system.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// A bounded recursion hit its cap before reaching its target accuracy.
    #[error("did not converge: {0}")]
    NonConvergence(String),
    /// An operation was requested in a gait phase where it is undefined.
    #[error("invalid phase: {0}")]
    InvalidPhase(String),
    /// The simulated walker left the region where the model is meaningful.
    #[error("simulation diverged: {0}")]
    SimulationDiverged(String),
}
