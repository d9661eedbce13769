use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qudit dimension {0} is outside the supported range 2..=16")]
    InvalidDim(usize),

    #[error("{what} = {value} is out of range [0, {bound})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        bound: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("outcome {outcome} on qudit {target} is impossible (probability {prob:e})")]
    ImpossibleBranch {
        target: usize,
        outcome: usize,
        prob: f64,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    /// Domain errors are bad arguments to an otherwise well-defined operation.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidDim(_) | Error::OutOfRange { .. } | Error::ShapeMismatch(_)
        )
    }

    pub(crate) fn out_of_range(what: &'static str, value: usize, bound: usize) -> Self {
        Error::OutOfRange { what, value, bound }
    }
}
