use thiserror::Error;

/// Failure modes shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),
    /// Problem data violates a structural requirement (ellipticity, geometry).
    #[error("configuration error: {0}")]
    Config(String),
    /// Factorization, quadrature or another numerical kernel failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
