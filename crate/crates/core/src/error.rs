use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("inversion of an element with no known nonzero coefficient")]
    InversionOfZero,

    #[error("inverse of an exact non-monomial needs a precision cap")]
    UnboundedInverse,

    #[error("not a q^{power}-th power at the tracked precision (u-exponent {exponent})")]
    PrecisionLoss { exponent: i64, power: u32 },

    #[error("evaluation does not converge: {0}")]
    DivergentEvaluation(String),

    #[error("no certified tail bound for a truncated series")]
    MissingTailBound,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pivot is not a unit at the tracked precision (row {0})")]
    SingularPivot(usize),

    #[error("field mismatch between operands")]
    FieldMismatch,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that mean "more digits would have answered this".
    pub fn is_precision_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::InversionOfZero
                | Error::PrecisionLoss { .. }
                | Error::DivergentEvaluation(_)
                | Error::MissingTailBound
                | Error::SingularPivot(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
