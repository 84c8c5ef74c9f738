use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: String,
        domain: &'static str,
    },

    #[error("uninformative signals: base_honest equals base_malicious, the posterior map is not invertible")]
    UninformativeSignals,

    #[error("numeric instability: {0}")]
    NumericInstability(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: estimated error {error:e} above tolerance {tolerance:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("enumeration budget exceeded: {needed:e} states > budget {budget:e}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("no committee size up to {k_max} reaches failure target {target:e}")]
    NoFeasibleSize { k_max: usize, target: f64 },

    #[error("{}", config_message(.line, .key, .message))]
    Config {
        line: Option<usize>,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn config_message(line: &Option<usize>, key: &str, message: &str) -> String {
    match line {
        Some(line) => format!("config line {line}: key `{key}`: {message}"),
        None => format!("config key `{key}`: {message}"),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(what: &'static str, value: impl ToString, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value: value.to_string(),
            domain,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Domain { .. } | Error::Config { .. } => 2,
            Error::UninformativeSignals | Error::BoundInapplicable(_) => 2,
            Error::NumericInstability(_) | Error::Quadrature { .. } => 3,
            Error::BudgetExceeded { .. } | Error::NoFeasibleSize { .. } => 4,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
