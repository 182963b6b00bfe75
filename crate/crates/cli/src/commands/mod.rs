pub mod allan;
pub mod calibrate;
pub mod fisher;
pub mod scan;
pub mod track;

use hompolar::Error;

/// `Ok(None)` for a quantity that is undefined at the configured parameters
/// (an empty cell in the output); other errors propagate.
pub(crate) fn defined(r: hompolar::Result<f64>) -> hompolar::Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(
            Error::ZeroInformation
            | Error::Singular(_)
            | Error::InsufficientData { .. }
            | Error::ZeroVariance(_),
        ) => Ok(None),
        Err(e) => Err(e),
    }
}
