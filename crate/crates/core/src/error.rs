use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The caller passed something outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The computation would exceed a configured memory or time budget.
    #[error("budget exceeded: {0}")]
    Resource(String),
    /// A numerical target could not be met; the best available estimate is attached.
    #[error("tolerance not reached: {message} (best estimate {best_re}+{best_im}i)")]
    Tolerance {
        message: String,
        best_re: f64,
        best_im: f64,
    },
    /// The mathematical hypothesis of a check does not hold for these inputs.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
