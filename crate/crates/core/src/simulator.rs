//! Monte Carlo generation of click records and the alternating-angle
//! tracking protocol.
//!
//! Every run owns a ChaCha8 generator seeded from a 64-bit seed, so output
//! depends only on the configuration. Independent streams (scan points,
//! replicates) draw their seeds from [`derive_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{mle_theta, Calibration, CountRecord};
use crate::fisher::max_fisher_angle;
use crate::model::{outcome_probabilities, SystemParams};
use crate::Scalar;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream`-th independent substream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5EED)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairCountMode {
    /// Exactly `round(rate · duration)` pairs per acquisition.
    #[default]
    Fixed,
    /// Poisson-distributed pair number with that mean.
    Poisson,
}

/// Source and acquisition settings for one simulated detector window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    /// Generated photon pairs per second, before loss.
    pub pairs_per_second: f64,
    /// Seconds per acquisition.
    pub duration: f64,
    pub seed: u64,
    pub pair_count_mode: PairCountMode,
    /// Polarisation-independent spurious coincidences per second.
    pub accidental_rate: f64,
    /// Seconds the rotation stage needs per move. Only advances timestamps.
    pub settle_time: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            pairs_per_second: 1.24e5,
            duration: 1.0,
            seed: 0x484F_4D50_4F4C,
            pair_count_mode: PairCountMode::Fixed,
            accidental_rate: 0.0,
            settle_time: 1.25,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.pairs_per_second) {
            return Err(Error::InvalidArgument(format!(
                "pairs_per_second must be >= 0, got {}",
                self.pairs_per_second
            )));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        if !finite_nonneg(self.accidental_rate) || !finite_nonneg(self.settle_time) {
            return Err(Error::InvalidArgument(
                "accidental_rate and settle_time must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Mean number of generated pairs per acquisition.
    pub fn mean_pairs(&self) -> f64 {
        self.pairs_per_second * self.duration
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Sinusoidal modulation `amplitude · sin(2π n / period)` with the period in
/// protocol rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub period: f64,
}

impl Sinusoid {
    fn at(&self, round: usize) -> f64 {
        if self.period == 0.0 {
            return 0.0;
        }
        self.amplitude * (std::f64::consts::TAU * round as f64 / self.period).sin()
    }
}

/// Slow drift of the experiment, applied once per protocol round.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftModel {
    pub alpha_rate: f64,
    pub gamma_rate: f64,
    /// Radians per round added to the true angle.
    pub theta_offset_rate: f64,
    pub alpha_sine: Option<Sinusoid>,
    pub gamma_sine: Option<Sinusoid>,
    pub theta_sine: Option<Sinusoid>,
}

/// Largest loss rate drift may reach.
const GAMMA_CEILING: f64 = 1.0 - 1e-9;

/// Drifted state at one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftedParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub theta_offset: T,
    /// Number of parameters that had to be clamped into their domain.
    pub clamped: usize,
}

impl DriftModel {
    pub fn is_static(&self) -> bool {
        *self == Self::default()
    }

    /// α, γ and the angle offset at round `round`, clamped into
    /// α ∈ [0, 1] and γ ∈ [0, 1).
    pub fn at_round<T: Scalar>(
        &self,
        base_alpha: T,
        base_gamma: T,
        round: usize,
    ) -> DriftedParams<T> {
        if self.is_static() {
            return DriftedParams {
                alpha: base_alpha,
                gamma: base_gamma,
                theta_offset: T::zero(),
                clamped: 0,
            };
        }
        let n = round as f64;
        let wave = |s: &Option<Sinusoid>| s.map_or(0.0, |s| s.at(round));
        let alpha = base_alpha.as_f64() + self.alpha_rate * n + wave(&self.alpha_sine);
        let gamma = base_gamma.as_f64() + self.gamma_rate * n + wave(&self.gamma_sine);
        let offset = self.theta_offset_rate * n + wave(&self.theta_sine);

        let mut clamped = 0;
        let mut clamp = |v: f64, lo: f64, hi: f64| {
            if v < lo || v > hi {
                clamped += 1;
            }
            v.clamp(lo, hi)
        };
        let alpha = clamp(alpha, 0.0, 1.0);
        let gamma = clamp(gamma, 0.0, GAMMA_CEILING);
        DriftedParams {
            alpha: T::of(alpha),
            gamma: T::of(gamma),
            theta_offset: T::of(offset),
            clamped,
        }
    }
}

/// Draws one acquisition: the pair number, then the click multinomial via
/// `n2 ~ Bin(M, P2)`, `n1 ~ Bin(M − n2, P1/(1 − P2))`, plus Poisson
/// accidentals on `n2`.
pub fn sample_acquisition<T: Scalar, R: Rng + ?Sized>(
    params: &SystemParams<T>,
    cfg: &AcquisitionConfig,
    rng: &mut R,
) -> CountRecord {
    let mean = cfg.mean_pairs();
    let pairs = match cfg.pair_count_mode {
        PairCountMode::Fixed => mean.round_ties_even() as u64,
        PairCountMode::Poisson => poisson(mean, rng),
    };
    let p = outcome_probabilities(params);
    let p2 = p.p2.as_f64().clamp(0.0, 1.0);
    let p1_given_not2 = if p2 < 1.0 {
        (p.p1.as_f64() / (1.0 - p2)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let n2 = binomial(pairs, p2, rng);
    let n1 = binomial(pairs - n2, p1_given_not2, rng);
    let n0 = pairs - n2 - n1;
    let accidentals = poisson(cfg.accidental_rate * cfg.duration, rng);
    CountRecord {
        n0: Some(n0),
        n1,
        n2: n2 + accidentals,
        duration: cfg.duration,
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean).expect("valid poisson mean").sample(rng) as u64
}

/// One acquisition per angle at fixed α and γ. Record `i` is drawn from
/// substream `i` of `cfg.seed`.
pub fn run_dip_scan<T: Scalar>(
    angles: &[T],
    base: &SystemParams<T>,
    cfg: &AcquisitionConfig,
) -> Result<Vec<(T, CountRecord)>> {
    if angles.is_empty() {
        return Err(Error::InvalidArgument(
            "dip scan needs at least one angle".into(),
        ));
    }
    cfg.validate()?;
    angles
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let params = base.with_theta_prime(t)?;
            let mut rng = rng_from_seed(derive_seed(cfg.seed, i as u64));
            Ok((t, sample_acquisition(&params, cfg, &mut rng)))
        })
        .collect()
}

/// Estimates from one protocol round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingRound<T> {
    pub round_index: usize,
    pub est_at_mf: T,
    pub est_at_shifted: T,
    /// `est_at_shifted − est_at_mf`.
    pub delta_estimate: T,
    /// Start of the round in seconds.
    pub timestamp: f64,
}

/// Output of [`run_tracking_protocol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRun<T> {
    pub theta_mf: T,
    pub delta_theta: T,
    pub rounds: Vec<TrackingRound<T>>,
    /// Drifted parameters clamped into their domain, summed over rounds.
    pub clamp_events: usize,
}

impl<T: Scalar> TrackingRun<T> {
    pub fn est_at_mf(&self) -> Vec<T> {
        self.rounds.iter().map(|r| r.est_at_mf).collect()
    }

    pub fn est_at_shifted(&self) -> Vec<T> {
        self.rounds.iter().map(|r| r.est_at_shifted).collect()
    }

    pub fn deltas(&self) -> Vec<T> {
        self.rounds.iter().map(|r| r.delta_estimate).collect()
    }
}

/// Alternating-angle protocol.
///
/// `θ′_MF` is fixed once from the base α and γ and the estimator keeps that
/// pre-drift calibration throughout. Each round applies the drift for its
/// index, acquires at `θ′_MF` and at `θ′_MF + Δθ′` (both shifted by any
/// angle drift) and records the two estimates and their difference.
pub fn run_tracking_protocol<T: Scalar>(
    delta_theta: T,
    rounds: usize,
    base: &SystemParams<T>,
    drift: &DriftModel,
    cfg: &AcquisitionConfig,
) -> Result<TrackingRun<T>> {
    if rounds == 0 {
        return Err(Error::InvalidArgument(
            "tracking needs at least one round".into(),
        ));
    }
    crate::error::check_finite(delta_theta, "delta_theta")?;
    cfg.validate()?;
    let theta_mf = max_fisher_angle(base.alpha(), base.gamma())?;
    let cal = Calibration::configured(base.alpha(), base.gamma())?;
    let mut rng = rng_from_seed(cfg.seed);
    let round_period = 2.0 * (cfg.duration + cfg.settle_time);

    let mut out = Vec::with_capacity(rounds);
    let mut clamp_events = 0;
    for n in 0..rounds {
        let d = drift.at_round(base.alpha(), base.gamma(), n);
        clamp_events += d.clamped;
        let at_mf = SystemParams::new(theta_mf + d.theta_offset, d.alpha, d.gamma)?;
        let shifted = at_mf.with_theta_prime(at_mf.theta_prime() + delta_theta)?;
        let est_at_mf = mle_theta(&cal, &sample_acquisition(&at_mf, cfg, &mut rng))?;
        let est_at_shifted = mle_theta(&cal, &sample_acquisition(&shifted, cfg, &mut rng))?;
        out.push(TrackingRound {
            round_index: n,
            est_at_mf,
            est_at_shifted,
            delta_estimate: est_at_shifted - est_at_mf,
            timestamp: n as f64 * round_period,
        });
    }
    Ok(TrackingRun {
        theta_mf,
        delta_theta,
        rounds: out,
        clamp_events,
    })
}
