use crate::geodesic::GeodesicState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point outside the model space: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular point: {0}")]
    Singular(String),
    /// Step-size underflow or a non-finite state; carries the last accepted state.
    #[error("integration failed at s = {s}: {reason}")]
    Integration {
        s: f64,
        reason: String,
        last: Box<GeodesicState>,
    },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("need at least {needed} values, got {got}")]
    Arity { needed: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Integration { .. } | Error::Quadrature(_))
    }
}
