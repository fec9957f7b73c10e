use thiserror::Error;

/// Errors raised by the receiver library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported Gold code degree {0} (supported: 5)")]
    UnsupportedDegree(u32),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("ill-conditioned data window (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("filter state corrupted: {0}")]
    StateCorruption(&'static str),

    #[error("invalid error bound {0}")]
    InvalidBound(f64),

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(&'static str),

    #[error("SINR undefined: interference-plus-noise power is {0}")]
    UndefinedSinr(f64),

    #[error("empty measurement window")]
    EmptyWindow,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that come from numerical breakdown during a run
    /// rather than from bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateInput(_)
                | Error::IllConditioned(_)
                | Error::StateCorruption(_)
                | Error::DegenerateEstimate(_)
                | Error::UndefinedSinr(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
