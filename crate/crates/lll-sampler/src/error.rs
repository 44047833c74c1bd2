use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance is unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("outside the supported regime: {0}")]
    Regime(String),
    #[error("conditions infeasible: e*alpha >= 1 (ln alpha = {log_alpha})")]
    ConditionsInfeasible { log_alpha: f64 },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("internal invariant failed: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInstance(_) | Error::Parse { .. } => 2,
            Error::Unsatisfiable(_) | Error::Regime(_) | Error::ConditionsInfeasible { .. } => 3,
            Error::Budget(_) => 4,
            Error::Contract(_) | Error::Invariant(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
