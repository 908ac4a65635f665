use thiserror::Error;

/// Crate-wide error type. Numerical routines return `Error` only for contract
/// violations and I/O trouble; scientific outcomes (blow-up, leakage) travel
/// through `dynamics::TerminalStatus` instead so a stopped run is not an error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),

    #[error("config: {0}")]
    Config(String),

    #[error("config parse: {0}")]
    Parse(String),

    #[error("profile: {0}")]
    Profile(String),

    #[error("derivative order {0} unsupported (expected 1, 2 or 3)")]
    DerivativeOrder(u32),

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("boundary no longer negligible: max |u| = {max_abs:.3e} on the outer band")]
    InterpolationBreakdown { max_abs: f64 },

    #[error("mismatched grids between operands")]
    GridMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
