//! Maximum-likelihood estimation of θ′ from click counts, calibration of
//! visibility and loss, and reconstruction of the generated pair number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{outcome_probabilities, validate_alpha, validate_gamma, SystemParams};
use crate::Scalar;

/// Counts observed in one acquisition window. `n0` (pairs with no click)
/// is unknown on real hardware and optional here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n0: Option<u64>,
    pub n1: u64,
    pub n2: u64,
    /// Acquisition time in seconds.
    pub duration: f64,
}

impl CountRecord {
    pub fn new(n1: u64, n2: u64, duration: f64) -> Self {
        Self {
            n0: None,
            n1,
            n2,
            duration,
        }
    }

    pub fn with_n0(mut self, n0: u64) -> Self {
        self.n0 = Some(n0);
        self
    }

    pub fn clicks(&self) -> u64 {
        self.n1 + self.n2
    }
}

/// Where a calibration value came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Supplied by configuration.
    Configured,
    /// Estimated from simulated or recorded counts; the note says how.
    Measured(String),
}

/// Visibility and loss treated as known during θ′ estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration<T> {
    alpha: T,
    gamma: T,
    pub alpha_source: Provenance,
    pub gamma_source: Provenance,
}

impl<T: Scalar> Calibration<T> {
    pub fn new(
        alpha: T,
        gamma: T,
        alpha_source: Provenance,
        gamma_source: Provenance,
    ) -> Result<Self> {
        validate_alpha(alpha)?;
        validate_gamma(gamma)?;
        Ok(Self {
            alpha,
            gamma,
            alpha_source,
            gamma_source,
        })
    }

    pub fn configured(alpha: T, gamma: T) -> Result<Self> {
        Self::new(alpha, gamma, Provenance::Configured, Provenance::Configured)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn params_at(&self, theta_prime: T) -> Result<SystemParams<T>> {
        SystemParams::new(theta_prime, self.alpha, self.gamma)
    }
}

/// Log-likelihood of `rec` at angle θ′.
///
/// With `n0` known this is `Σ N_k log P_k`; otherwise the likelihood is
/// conditioned on at least one click, i.e. `P_1` and `P_2` are renormalised
/// by `P_1 + P_2`. Terms with zero count are skipped; a zero probability
/// paired with a nonzero count is [`Error::ImpossibleOutcome`].
pub fn log_likelihood<T: Scalar>(
    theta_prime: T,
    cal: &Calibration<T>,
    rec: &CountRecord,
) -> Result<T> {
    let p = outcome_probabilities(&cal.params_at(theta_prime)?);
    let term = |n: u64, prob: T| -> Result<T> {
        if n == 0 {
            Ok(T::zero())
        } else if prob > T::zero() {
            Ok(T::of_u64(n) * prob.ln())
        } else {
            Err(Error::ImpossibleOutcome)
        }
    };
    match rec.n0 {
        Some(n0) => Ok(term(n0, p.p0)? + term(rec.n1, p.p1)? + term(rec.n2, p.p2)?),
        None => {
            let clicked = p.clicked();
            Ok(term(rec.n1, p.p1 / clicked)? + term(rec.n2, p.p2 / clicked)?)
        }
    }
}

/// Closed-form MLE of θ′ for (possibly non-integer) single and coincidence
/// totals. Always returns a value in `[0, π/2]`.
///
/// Solves `N₁P₂ = N₂P₁` for `cos²θ′` and then applies, in order:
/// a negative numerator `N₁ − N₂(1+3γ)/(1−γ)` maps to `π/2`; a radicand
/// above one maps to `0`. Only the magnitude of θ′ is identifiable.
pub fn mle_theta_from_totals<T: Scalar>(cal: &Calibration<T>, n1: T, n2: T) -> T {
    let (a, g) = (cal.alpha, cal.gamma);
    let one = T::one();
    let numerator = n1 - n2 * (one + T::of(3.0) * g) / (one - g);
    if numerator <= T::zero() {
        // numerator == 0 gives cos θ′ = 0 exactly
        return T::FRAC_PI_2();
    }
    let denominator = a * (n1 + n2);
    if !(denominator > T::zero()) {
        return T::zero();
    }
    let radicand = numerator / denominator;
    if radicand > one {
        return T::zero();
    }
    radicand.sqrt().acos()
}

/// MLE of θ′ from a count record; only `n1` and `n2` enter.
pub fn mle_theta<T: Scalar>(cal: &Calibration<T>, rec: &CountRecord) -> Result<T> {
    if rec.clicks() == 0 {
        return Err(Error::EmptyRecord);
    }
    Ok(mle_theta_from_totals(
        cal,
        T::of_u64(rec.n1),
        T::of_u64(rec.n2),
    ))
}

/// Loss rate from a record taken with orthogonal polarisations
/// (`θ′ = ±π/2`): `γ = (N₁ − N₂)/(N₁ + 3N₂)`.
pub fn calibrate_gamma<T: Scalar>(rec_at_orthogonal: &CountRecord) -> Result<T> {
    let (n1, n2) = (rec_at_orthogonal.n1, rec_at_orthogonal.n2);
    if n1 + n2 == 0 {
        return Err(Error::EmptyRecord);
    }
    if n1 < n2 {
        return Err(Error::InvalidCalibration(format!(
            "N1 = {n1} < N2 = {n2} at orthogonal polarisations implies negative loss"
        )));
    }
    let (n1, n2) = (T::of_u64(n1), T::of_u64(n2));
    let gamma = (n1 - n2) / (n1 + T::of(3.0) * n2);
    if gamma >= T::one() {
        return Err(Error::InvalidCalibration(
            "no coincidences at orthogonal polarisations (gamma = 1)".into(),
        ));
    }
    Ok(gamma)
}

/// Coverage required of a dip scan around 0° and 90° (folded angle).
pub const DIP_SCAN_COVERAGE_DEG: f64 = 2.0;

/// Visibility from a dip scan: `α = 1 − min(N₂)/max(N₂)`.
///
/// The scan must contain angles within 2° of the dip bottom and of the
/// orthogonal plateau (after folding θ′ into [0, π/2]) and use one
/// acquisition time throughout.
pub fn calibrate_alpha<T: Scalar>(dip_scan: &[(T, CountRecord)]) -> Result<T> {
    let first = dip_scan
        .first()
        .ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
    let duration = first.1.duration;
    if dip_scan
        .iter()
        .any(|(_, r)| (r.duration - duration).abs() > 1e-12 * duration.abs())
    {
        return Err(Error::InvalidCalibration(
            "dip scan records have unequal durations".into(),
        ));
    }
    let tol = T::deg(DIP_SCAN_COVERAGE_DEG);
    let folded: Vec<T> = dip_scan.iter().map(|(t, _)| fold_angle(*t)).collect();
    let near_bottom = folded.iter().any(|&t| t <= tol);
    let near_plateau = folded.iter().any(|&t| t >= T::FRAC_PI_2() - tol);
    if !(near_bottom && near_plateau) {
        return Err(Error::InvalidCalibration(format!(
            "dip scan must include angles within {DIP_SCAN_COVERAGE_DEG} deg of 0 and 90 deg"
        )));
    }
    let max = dip_scan.iter().map(|(_, r)| r.n2).max().unwrap_or(0);
    let min = dip_scan.iter().map(|(_, r)| r.n2).min().unwrap_or(0);
    if max == 0 {
        return Err(Error::InvalidCalibration(
            "no coincidences anywhere in the dip scan".into(),
        ));
    }
    Ok(T::one() - T::of_u64(min) / T::of_u64(max))
}

/// Maps an angle into [0, π/2] using the evenness and π-periodicity of the
/// coincidence probability.
pub fn fold_angle<T: Scalar>(theta_prime: T) -> T {
    let pi = T::PI();
    let mut t = theta_prime % pi;
    if t < T::zero() {
        t = t + pi;
    }
    t.min(pi - t)
}

/// Number of generated pairs implied by the clicks: `(N₁ + N₂)/(1 − γ²)`.
pub fn reconstruct_pairs<T: Scalar>(rec: &CountRecord, gamma: T) -> Result<T> {
    validate_gamma(gamma)?;
    Ok(T::of_u64(rec.clicks()) / (T::one() - gamma * gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn cal(a: f64, g: f64) -> Calibration<f64> {
        Calibration::configured(a, g).unwrap()
    }

    fn expected_record(t: f64, a: f64, g: f64, pairs: f64) -> CountRecord {
        let p = outcome_probabilities(&SystemParams::new(t, a, g).unwrap());
        CountRecord::new(
            (pairs * p.p1).round_ties_even() as u64,
            (pairs * p.p2).round_ties_even() as u64,
            1.0,
        )
    }

    #[test]
    fn likelihood_of_all_null_record() {
        let rec = CountRecord::new(0, 0, 1.0).with_n0(500);
        let ll = log_likelihood(0.3, &cal(0.79, 0.91), &rec).unwrap();
        assert!((ll - 500.0 * (0.91f64 * 0.91).ln()).abs() < 1e-10);
    }

    #[test]
    fn likelihood_rejects_impossible_outcomes() {
        // γ = 0 never produces a null event
        let rec = CountRecord::new(10, 3, 1.0).with_n0(1);
        assert_eq!(
            log_likelihood(0.3, &cal(0.79, 0.0), &rec),
            Err(Error::ImpossibleOutcome)
        );
        // perfect dip has no coincidences
        let rec = CountRecord::new(10, 3, 1.0);
        assert_eq!(
            log_likelihood(0.0, &cal(1.0, 0.5), &rec),
            Err(Error::ImpossibleOutcome)
        );
    }

    #[test]
    fn likelihood_shape_is_independent_of_n0() {
        let c = cal(0.79, 0.91);
        let a = CountRecord::new(20000, 230, 1.0);
        let b = a.with_n0(103_770);
        let d = |t: f64, r: &CountRecord| log_likelihood(t, &c, r).unwrap();
        let da = d(0.5, &a) - d(0.7, &a);
        let db = d(0.5, &b) - d(0.7, &b);
        assert!((da - db).abs() < 1e-6 * da.abs());
    }

    #[test]
    fn mle_inverts_exact_counts() {
        let rec = expected_record(0.6, 0.79, 0.91, 1e9);
        let t = mle_theta(&cal(0.79, 0.91), &rec).unwrap();
        assert!((t - 0.6).abs() < 1e-6, "{t}");
    }

    #[test]
    fn mle_mapping_rules() {
        let c = cal(1.0, 0.91);
        assert_eq!(mle_theta(&c, &CountRecord::new(100, 0, 1.0)).unwrap(), 0.0);
        // n2/n1 = (1−γ)/(1+3γ)
        let c = cal(0.79, 0.91);
        let rec = CountRecord::new(373, 9, 1.0);
        assert!((mle_theta(&c, &rec).unwrap() - FRAC_PI_2).abs() < 1e-12);
        // numerator negative
        assert_eq!(
            mle_theta(&c, &CountRecord::new(100, 50, 1.0)).unwrap(),
            FRAC_PI_2
        );
        assert_eq!(
            mle_theta(&c, &CountRecord::new(0, 7, 1.0)).unwrap(),
            FRAC_PI_2
        );
        // radicand above one
        assert_eq!(mle_theta(&c, &CountRecord::new(100, 0, 1.0)).unwrap(), 0.0);
        assert_eq!(
            mle_theta(&c, &CountRecord::new(0, 0, 1.0)),
            Err(Error::EmptyRecord)
        );
    }

    #[test]
    fn mle_with_zero_visibility_is_total() {
        let c = cal(0.0, 0.5);
        assert_eq!(mle_theta(&c, &CountRecord::new(100, 1, 1.0)).unwrap(), 0.0);
        assert_eq!(
            mle_theta(&c, &CountRecord::new(100, 60, 1.0)).unwrap(),
            FRAC_PI_2
        );
    }

    #[test]
    fn mle_is_scale_invariant() {
        let c = cal(0.79, 0.91);
        for &(n1, n2) in &[(20000u64, 230u64), (17, 1), (5000, 100)] {
            let base = mle_theta(&c, &CountRecord::new(n1, n2, 1.0)).unwrap();
            for k in [2u64, 3, 7, 1000] {
                let scaled = mle_theta(&c, &CountRecord::new(k * n1, k * n2, 1.0)).unwrap();
                assert!((scaled - base).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_calibration_examples() {
        // N₂/N₁ = (1−γ)/(1+3γ) at γ = 0.91
        let g: f64 = calibrate_gamma(&CountRecord::new(373, 9, 1.0)).unwrap();
        assert!((g - 0.91).abs() < 1e-15);
        assert_eq!(
            calibrate_gamma::<f64>(&CountRecord::new(50, 50, 1.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            calibrate_gamma::<f64>(&CountRecord::new(50, 0, 1.0)),
            Err(Error::InvalidCalibration(_))
        ));
        assert!(matches!(
            calibrate_gamma::<f64>(&CountRecord::new(40, 50, 1.0)),
            Err(Error::InvalidCalibration(_))
        ));
    }

    fn dip_scan(a: f64, g: f64, pairs: f64) -> Vec<(f64, CountRecord)> {
        (0..=90)
            .map(|d| {
                let t = (d as f64).to_radians();
                (t, expected_record(t, a, g, pairs))
            })
            .collect()
    }

    #[test]
    fn alpha_calibration_examples() {
        let a: f64 = calibrate_alpha(&dip_scan(0.79, 0.91, 1e15)).unwrap();
        assert!((a - 0.79).abs() < 1e-12, "{a}");

        let flat: Vec<_> = [0.0, 0.5, 1.57]
            .iter()
            .map(|&t| (t, CountRecord::new(100, 40, 1.0)))
            .collect();
        assert_eq!(calibrate_alpha(&flat).unwrap(), 0.0);

        let mut scan = flat.clone();
        scan[0].1.n2 = 0;
        assert_eq!(calibrate_alpha(&scan).unwrap(), 1.0);
    }

    #[test]
    fn alpha_calibration_errors() {
        let zero: Vec<_> = [0.0, 1.57]
            .iter()
            .map(|&t| (t, CountRecord::new(100, 0, 1.0)))
            .collect();
        assert!(calibrate_alpha(&zero).is_err());

        let mut uneven = dip_scan(0.79, 0.91, 1e6);
        uneven[3].1.duration = 2.0;
        assert!(calibrate_alpha(&uneven).is_err());

        let partial: Vec<_> = dip_scan(0.79, 0.91, 1e6).into_iter().take(60).collect();
        assert!(calibrate_alpha(&partial).is_err());

        // negative and wrapped angles count through folding
        let wrapped: Vec<_> = [-0.01f64, -1.56, 3.1]
            .iter()
            .map(|&t| (t, CountRecord::new(100, 40, 1.0)))
            .collect();
        assert!(calibrate_alpha(&wrapped).is_ok());
        assert!(calibrate_alpha::<f64>(&[]).is_err());
    }

    #[test]
    fn pair_reconstruction() {
        let rec = CountRecord::new(20000, 1300, 1.0);
        assert_eq!(reconstruct_pairs(&rec, 0.0).unwrap(), 21300.0);
        let n: f64 = reconstruct_pairs(&rec, 0.91).unwrap();
        assert!((n - 123_909.249_563_699_83).abs() < 1e-6);
        assert!(reconstruct_pairs(&rec, 1.0).is_err());
    }

    #[test]
    fn reconstruction_from_expected_counts() {
        let pairs = 4.0e15;
        let p = outcome_probabilities(&SystemParams::new(0.6, 0.79, 0.91).unwrap());
        let rec = CountRecord::new((pairs * p.p1) as u64, (pairs * p.p2) as u64, 1.0);
        let n: f64 = reconstruct_pairs(&rec, 0.91).unwrap();
        assert!(((n - pairs) / pairs).abs() < 1e-12);
    }

    #[test]
    fn fold_angle_covers_all_quadrants() {
        for (t, want) in [
            (0.2, 0.2),
            (-0.2, 0.2),
            (3.0, std::f64::consts::PI - 3.0),
            (1.6, std::f64::consts::PI - 1.6),
        ] {
            assert!((fold_angle(t) - want).abs() < 1e-15);
        }
    }
}
