use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("complete elliptic integral diverges at k = 1")]
    DivergentIntegral,
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("relaxation did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },
    #[error("unstable configuration: lowest stability eigenvalue {min_eigenvalue:e}")]
    Unstable { min_eigenvalue: f64 },
    #[error("zero mode: omega[{index}] = {omega:e}")]
    ZeroMode { index: usize, omega: f64 },
    #[error("no soliton centers found")]
    NoCenters,
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("blocks overlap")]
    OverlappingBlocks,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("need at least two internal modes, found {0}")]
    TooFewInternalModes(usize),
    #[error("state is not in normal-mode ground form")]
    NotGroundForm,
    #[error("fit window has {0} points, need at least 4")]
    FitWindowTooSmall(usize),
    #[error("no stable configuration: {0}")]
    NoStableConfiguration(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_) | Error::Domain(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
