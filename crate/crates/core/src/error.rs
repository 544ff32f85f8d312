use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("angle undefined for oscillator {oscillator}: phase component pair is (numerically) zero")]
    UndefinedAngle { oscillator: usize },

    #[error("numerical blow-up at step {step}")]
    NumericalBlowUp { step: usize },

    #[error("record too short: layout requires {required} samples, record has {found}")]
    RecordTooShort { required: usize, found: usize },

    #[error(
        "ridge normal equations are not positive definite (regularization = {regularization}); \
         use a regularization strength > 0"
    )]
    SingularGram { regularization: f64 },

    #[error("internal matrix has zero spectral radius after {attempts} attempts")]
    ZeroSpectralRadius { attempts: usize },

    #[error("forecast aborted at step {step}: {reason}")]
    ForecastAborted { step: usize, reason: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}
