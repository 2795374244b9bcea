use thiserror::Error;

use crate::quantum::Combo;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("reflectance out of range: {name} = {value} (must lie in [0, 1])")]
    ReflectanceOutOfRange { name: &'static str, value: f64 },

    #[error("visibility out of range: {0} (must lie in [0, 1])")]
    VisibilityOutOfRange(f64),

    #[error("photon budget must be positive and finite, got {0}")]
    InvalidBudget(f64),

    #[error("dead time {0} ps outside the model range [1, 1e12] ps")]
    DeadTimeOutOfRange(f64),

    #[error("photon detection efficiency out of range: {0} (must lie in [0, 1])")]
    PdeOutOfRange(f64),

    #[error("dark count rate must be nonnegative and finite, got {0}")]
    InvalidDarkCounts(f64),

    #[error("photon rate must be nonnegative and finite, got {0}")]
    InvalidRate(f64),

    #[error("probability out of range: {0}")]
    ProbabilityOutOfRange(f64),

    #[error("basis combination {combo} is starved ({total} counts, need at least 1)")]
    StarvedCombo { combo: Combo, total: f64 },

    #[error("uncertainty must be positive, got {0}")]
    NonPositiveUncertainty(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no secure operating point: every grid point has zero key rate")]
    NoSecureOperatingPoint,

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMonteCarlo(String),

    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl Error {
    /// True for errors caused by an invalid input value, as opposed to output failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Csv(_))
    }
}
