use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("relative wavefunction is not even under r -> -r (singlet spatial symmetry violated)")]
    NotEvenParity,

    #[error("requested {requested} states but only {resolvable} are resolved on this grid")]
    UnresolvedStates { requested: usize, resolvable: usize },

    #[error("self-consistent field did not converge after {iterations} iterations (last residual {residual:.3e})")]
    ScfNotConverged { iterations: usize, residual: f64 },

    #[error("density is not positive at grid index {index} inside the inversion window")]
    DensityNotPositive { index: usize },

    #[error("norm drift {drift:.3e} at t = {time}")]
    NormDrift { time: f64, drift: f64 },

    #[error("sample-point matrix is near-singular (condition number {condition:.3e}); channels {} and {} are nearly indistinguishable", .channels.0, .channels.1)]
    NearSingular { condition: f64, channels: (usize, usize) },

    #[error("transition density matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}
