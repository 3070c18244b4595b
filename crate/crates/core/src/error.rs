use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("a weight profile needs at least one element")]
    EmptyProfile,

    #[error("weight {index} is invalid ({value}); weights must be non-negative and not NaN")]
    InvalidWeight { index: usize, value: f64 },

    #[error("arrival time {index} is {value}; arrival times must lie in [0,1]")]
    InvalidArrival { index: usize, value: f64 },

    #[error("profile has {weights} elements but the arrival draw has {arrivals}")]
    DimensionMismatch { weights: usize, arrivals: usize },

    #[error("gap index k={k} is out of range [2, {n}]")]
    GapIndexOutOfRange { k: usize, n: usize },

    #[error("the gap index k is required here but was not supplied")]
    MissingGapIndex,

    #[error("{name} must lie in {range}, got {value}")]
    OutOfDomain {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("selection count L={l} is out of range [{min}, {max}]")]
    SelectionCountOutOfRange { l: usize, min: usize, max: usize },

    #[error("exhaustive enumeration supports n <= {max}, got n={n}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("replay file line {line}: {message}")]
    Replay { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Fails with [`Error::OutOfDomain`] unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, range: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfDomain { name, range, value })
    }
}

/// Checks a waiting time against `[0, 1)`.
pub(crate) fn check_tau(tau: f64) -> Result<()> {
    ensure((0.0..1.0).contains(&tau), "tau", "[0,1)", tau)
}

/// Checks a threshold parameter against `[0, inf)`.
pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    ensure(value >= 0.0, name, "[0,inf)", value)
}
