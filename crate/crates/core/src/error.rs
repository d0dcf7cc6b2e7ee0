use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("frequency {omega} outside the admissible interval (|ω| < {m})")]
    OmegaOutOfRange { omega: f64, m: f64 },

    #[error("quadrature did not converge: best estimate {best:e}, error estimate {err:e}")]
    QuadratureNotConverged { best: f64, err: f64 },

    #[error("memory kernel tolerance not met at τ = {tau}: error estimate {err:e}")]
    KernelNotConverged { tau: f64, err: f64 },

    #[error("Volterra step {step} did not converge")]
    VolterraNotConverged { step: usize },

    #[error("inconsistent solitary wave: {0}")]
    InconsistentWave(String),

    #[error("relative residual undefined for the zero wave")]
    ZeroWave,

    #[error("metric cutoff radius {rmax} does not fit in a box of edge {l}")]
    RmaxTooLarge { rmax: usize, l: f64 },

    #[error("spectral window too short: {samples} samples (need at least {min})")]
    WindowTooShort { samples: usize, min: usize },

    #[error("time {0} is not on the Volterra grid")]
    TimeOffGrid(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Json(_)
            | Error::InvalidMass(_)
            | Error::InvalidPotential(_)
            | Error::InvalidCoupling(_)
            | Error::InvalidGrid(_)
            | Error::InvalidInput(_) => 1,
            _ => 2,
        }
    }
}
