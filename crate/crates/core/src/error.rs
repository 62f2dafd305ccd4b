use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Axis names, sizes or shapes do not line up.
    #[error("structural error: {0}")]
    Structural(String),

    /// A scalar argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("chaining infeasible: |A2| = {a2} < |A3| = {a3} (deficit {})", a3 - a2)]
    ChainingInfeasible { a2: usize, a3: usize },

    #[error("randomness pool mismatch: {0}")]
    PoolMismatch(String),

    #[error("missing side message for the last block")]
    MissingSideMessage,

    #[error("enumeration budget exceeded: need {required} cells, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("target rejected: {0}")]
    TargetRejected(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::ChainingInfeasible { .. } => "chaining-infeasible",
            Error::PoolMismatch(_) => "pool-mismatch",
            Error::MissingSideMessage => "missing-side-message",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::TargetRejected(_) => "target-rejected",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
