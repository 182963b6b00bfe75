use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("probability {0} leaves [0, 1] by more than round-off")]
    ProbabilityExcursion(f64),

    #[error("singular parameters: {0}")]
    Singular(&'static str),

    #[error("outcome probability underflow ({0:e}) in numerical differentiation")]
    Underflow(f64),

    #[error("observed outcome has zero probability")]
    ImpossibleOutcome,

    #[error("count record has no clicks")]
    EmptyRecord,

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("Fisher information is zero")]
    ZeroInformation,

    #[error("sample variance is zero at angle {0} rad")]
    ZeroVariance(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite<T: crate::Scalar>(value: T, name: &'static str) -> Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}

pub(crate) fn check_range<T: crate::Scalar>(
    value: T,
    name: &'static str,
    range: &'static str,
    ok: bool,
) -> Result<T> {
    check_finite(value, name)?;
    if ok {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value: value.as_f64(),
            range,
        })
    }
}
