use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field size mismatch: expected {expected} values, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} at grid index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{quantity} must be positive, found {value} at grid index {index}")]
    Positivity {
        quantity: &'static str,
        index: usize,
        value: f64,
    },

    #[error("denominator floor violated: 1 + a = {value} < {floor} at grid index {index}")]
    DenominatorFloor { index: usize, value: f64, floor: f64 },

    #[error("conductivity kappa3(theta) must stay positive, minimum {min} at grid index {index}")]
    NegativeConductivity { index: usize, min: f64 },

    #[error("the a-form requires the unit equilibrium (1, 1), found ({rho}, {theta})")]
    NonUnitEquilibrium { rho: f64, theta: f64 },

    #[error("invalid time stepping: {0}")]
    InvalidTime(String),

    #[error("forcing has {actual} samples, time grid needs {expected}")]
    ForcingMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} snapshots, trajectory has {actual}")]
    TooFewSnapshots { needed: usize, actual: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unresolved data: {0}")]
    Unresolved(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
