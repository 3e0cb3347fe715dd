use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    /// Caller supplied inputs that do not fit the operation's contract.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("no metric is available on the {0} phase space")]
    UnsupportedMetric(&'static str),

    /// A shift operation needed more symbols than the truncation keeps.
    #[error("shift horizon exhausted: needed {needed} symbols, {available} available")]
    HorizonExhausted { needed: usize, available: usize },

    /// An orbit step failed; `index` is the position in the schedule.
    #[error("schedule entry {index}: {source}")]
    Schedule {
        index: usize,
        #[source]
        source: Box<ChaosError>,
    },
}

impl ChaosError {
    pub fn usage(msg: impl Into<String>) -> Self {
        ChaosError::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, ChaosError>;
