use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The bound formula has no finite value for these inputs (treat as vacuous).
    #[error("bound undefined: {0}")]
    Undefined(String),
    /// Input data could not be parsed or validated.
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("training set is not separable")]
    Inseparable,
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        domain(format!("eps must lie in (0,1], got {eps}"))
    }
}
