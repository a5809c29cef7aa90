use thiserror::Error;

/// Errors raised by the solution constructors, oracles and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate balance: n(gamma + 1) = 2 makes the leading coefficient vanish")]
    DegenerateBalance,

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("trajectory did not terminate with a detected blow-up")]
    NoBlowUp,

    #[error("negative discriminant {value:e} under the delta-mass square root (concentration condition fails)")]
    NegativeDiscriminant { value: f64 },

    #[error("degenerate front: {0}")]
    DegenerateFront(String),

    #[error("side temperature vanished at t = {t}; side density is infinite")]
    InfiniteSideDensity { t: f64 },

    #[error("blow-up reached at m = {m}, t = {t} (blow-up time {t_star})")]
    BlowUpReached { m: f64, t: f64, t_star: f64 },

    #[error("quadrature failed to reach tolerance: error estimate {estimate:e} after {intervals} intervals")]
    QuadratureFailure { estimate: f64, intervals: usize },

    #[error("map inversion failed: {0}")]
    InversionFailure(String),

    #[error("characteristics crossed at t = {t}; the smooth oracle broke down")]
    CharacteristicCrossing { t: f64 },

    #[error("stencil point (t = {t}, x = {x:?}) leaves the declared field domain")]
    EvaluationDomain { t: f64, x: Vec<f64> },

    #[error("root bracketing failed: {0}")]
    RootNotBracketed(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
