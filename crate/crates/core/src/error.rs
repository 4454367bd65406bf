use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or combination of parameters is outside the supported range.
    #[error("configuration error: {0}")]
    Config(String),

    /// A statistic was requested on data for which it is not defined (e.g. zero power).
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    /// The regression matrix does not have full column rank.
    #[error("identifiability error: regression matrix is rank deficient in columns [{}] (condition estimate {condition:.3e})", columns.join(", "))]
    Identifiability {
        columns: Vec<String>,
        condition: f64,
    },

    /// The amplifier gain vanishes where it must be divided by.
    #[error("non-invertible operating point: {0}")]
    NonInvertible(String),

    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
