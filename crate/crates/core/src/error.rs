use crate::numerics::NumericsError;

/// Errors raised by the model, the simulator, and the CLI layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate conditioning: survival {survival:e} beyond radius {radius} km")]
    DegenerateConditioning { radius: f64, survival: f64 },
    #[error("cluster kernel: {0}")]
    Kernel(String),
    #[error("simulation: {0}")]
    Simulation(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { key: key.into(), reason: reason.into() }
    }
}

/// Attaches a description of the failing step to an error.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T, E: Into<Error>> Context<T> for std::result::Result<T, E> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::Context { context: what(), source: Box::new(e.into()) })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
