use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown benchmark function id {0} (expected 1..=14)")]
    UnknownFunction(u32),

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("sampling would produce {0} sample(s); at least 2 are required")]
    TooFewSamples(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} needs at least {needed} values, got {got}")]
    NotEnoughData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("isolation forest has no trees")]
    EmptyForest,

    #[error("baseline precondition violated: f(t_1) = {0} must be > 0")]
    NonPositiveStart(f64),

    #[error("iteration guard tripped after {iterations} iterations ({trials} trial points)")]
    IterationLimit { iterations: usize, trials: usize },

    #[error("CSV input: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
