use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0}")]
    Domain(String),

    #[error("{message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("propagation table: {0}")]
    PropagationTable(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("settlement not reached after {0} extra blocks")]
    Settlement(usize),

    #[error("simulation invariant violated: {0}")]
    SimulationBug(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Numerical failures map to a distinct CLI exit code; everything else is a domain error.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::Settlement(_) | Error::SimulationBug(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
