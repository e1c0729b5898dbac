use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("invalid key parameters K={k}, P={p}: need 1 <= K <= P")]
    InvalidParams { k: u64, p: u64 },

    #[error("need at least 3 nodes, got n={n}")]
    TooFewNodes { n: u64 },

    #[error("index k={k} outside 0..={max}")]
    IndexOutOfRange { k: u64, max: u64 },

    #[error("K={k}, P={p} violates 3K <= P")]
    OutsideRegime { k: u64, p: u64 },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(String),

    #[error("enumeration needs {required} assignments, cap is {cap}")]
    Infeasible { required: String, cap: u64 },

    #[error("identity violated for {what}: {left} != {right}")]
    IdentityViolation {
        what: String,
        left: String,
        right: String,
    },

    #[error("{what} evaluated to non-integer {value}")]
    IntegralityViolation { what: String, value: String },

    #[error("invalid n-grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
