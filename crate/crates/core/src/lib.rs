//! Hong-Ou-Mandel two-photon polarimetry.
//!
//! The crate models the coincidence statistics of two linearly polarised
//! photons meeting on a 50:50 beam splitter, derives the Fisher information
//! of the resulting click distribution, estimates the half polarisation
//! angle θ′ from click counts by maximum likelihood, and simulates the
//! alternating-angle tracking protocol used to cancel slow drift.
//!
//! All math is generic over the floating point type through [`Scalar`]; the
//! aliases at the crate root fix it to `f64` (or `f32`) for everyday use.
//!
//! ```
//! use hompolar::{fisher, Params};
//!
//! let theta_mf = fisher::max_fisher_angle(0.79, 0.91).unwrap();
//! let at_mf = Params::new(theta_mf, 0.79, 0.91).unwrap();
//! let std = fisher::crb_std(&at_mf, 1.24e5).unwrap();
//! assert!((theta_mf.to_degrees() - 34.2).abs() < 0.1);
//! assert!(std.to_degrees() < 2.4);
//! ```

// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod fisher;
pub mod model;
pub mod scalar;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use estimation::{Calibration, CountRecord, Provenance};
pub use fisher::{CovarianceBound, FisherMatrix};
pub use model::{OutcomeProbabilities, PolarisationState, SystemParams};
pub use scalar::Scalar;
pub use simulator::{AcquisitionConfig, DriftModel, PairCountMode, TrackingRound, TrackingRun};
pub use stats::EstimateSeries;

pub type State = PolarisationState<f64>;
pub type Params = SystemParams<f64>;
pub type Outcomes = OutcomeProbabilities<f64>;
pub type Fisher = FisherMatrix<f64>;
pub type Covariance = CovarianceBound<f64>;
pub type Cal = Calibration<f64>;
pub type Round = TrackingRound<f64>;
pub type Series = EstimateSeries<f64>;

pub type StateF32 = PolarisationState<f32>;
pub type ParamsF32 = SystemParams<f32>;
pub type FisherF32 = FisherMatrix<f32>;
pub type CalF32 = Calibration<f32>;
