use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("degenerate spectrum at level {level}: gap {gap:.3e}")]
    DegenerateSpectrum { level: usize, gap: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("Schrieffer-Wolff expansion invalid: J = {j:.3} (must be < {limit})")]
    ExpansionInvalid { j: f64, limit: f64 },

    #[error("quadrature failed to reach tolerance on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("metric vanishes at {at}; geometric speed is unbounded")]
    SingularMetric { at: f64 },

    #[error("pulse endpoint missed: reached {reached}, target {target}")]
    EndpointMiss { reached: f64, target: f64 },

    #[error("invalid T2 = {0}")]
    InvalidT2(f64),

    #[error("density matrix lost positivity (min eigenvalue {min_eigenvalue:.3e})")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("density matrix Hermiticity drift {0:.3e} exceeds limit")]
    HermiticityDrift(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input or configuration, as opposed to a
    /// numerical failure during a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_) | Error::ShapeMismatch(_) | Error::InvalidT2(_))
    }
}
