use alloc::string::String;

/// Failures raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("set is empty")]
    EmptySet,
    #[error("polar coordinates are singular at the origin")]
    SingularPoint,
    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("tuning infeasible: {0}")]
    InfeasibleTuning(String),
    #[error("degenerate signal family: {0}")]
    DegenerateFamily(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("sample grids do not match: {0}")]
    GridMismatch(String),
    #[error("linear system is singular: {0}")]
    Singular(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
