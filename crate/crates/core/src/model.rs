//! Closed-form probability model of two-photon interference on a beam
//! splitter: state overlap, coincidence probability and the lossy
//! zero/one/two-click distribution per photon pair.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_range, Error, Result};
use crate::Scalar;

/// Pure polarisation state `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`, given by its
/// Poincaré sphere angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarisationState<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Scalar> PolarisationState<T> {
    pub fn new(theta: T, phi: T) -> Result<Self> {
        check_finite(theta, "theta")?;
        check_finite(phi, "phi")?;
        Ok(Self { theta, phi })
    }

    pub fn horizontal() -> Self {
        Self {
            theta: T::zero(),
            phi: T::zero(),
        }
    }

    pub fn vertical() -> Self {
        Self {
            theta: T::PI(),
            phi: T::zero(),
        }
    }

    /// Linear polarisation on the equator-to-pole great circle (`φ = 0`).
    pub fn linear(theta: T) -> Self {
        Self {
            theta,
            phi: T::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        check_finite(self.theta, "theta")?;
        check_finite(self.phi, "phi")?;
        Ok(())
    }
}

/// Parameters of the linear-polarisation experiment: the half angle θ′
/// between the two photons, the visibility α of all other degrees of
/// freedom and the per-photon loss rate γ.
///
/// θ′ may be any real number (the model is even and π-periodic in it);
/// α ∈ [0, 1] and γ ∈ [0, 1) are enforced on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    theta_prime: T,
    alpha: T,
    gamma: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(theta_prime: T, alpha: T, gamma: T) -> Result<Self> {
        check_finite(theta_prime, "theta_prime")?;
        validate_alpha(alpha)?;
        validate_gamma(gamma)?;
        Ok(Self {
            theta_prime,
            alpha,
            gamma,
        })
    }

    pub fn theta_prime(&self) -> T {
        self.theta_prime
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Same α and γ at a different angle.
    pub fn with_theta_prime(&self, theta_prime: T) -> Result<Self> {
        Self::new(theta_prime, self.alpha, self.gamma)
    }

    /// The parameter vector `[θ′, α, γ]`.
    pub fn as_vector(&self) -> [T; 3] {
        [self.theta_prime, self.alpha, self.gamma]
    }
}

pub(crate) fn validate_alpha<T: Scalar>(alpha: T) -> Result<T> {
    check_range(
        alpha,
        "alpha",
        "[0, 1]",
        alpha >= T::zero() && alpha <= T::one(),
    )
}

pub(crate) fn validate_gamma<T: Scalar>(gamma: T) -> Result<T> {
    check_range(
        gamma,
        "gamma",
        "[0, 1)",
        gamma >= T::zero() && gamma < T::one(),
    )
}

/// Per-pair probabilities of zero, one and two detector clicks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities<T> {
    pub p0: T,
    pub p1: T,
    pub p2: T,
}

impl<T: Scalar> OutcomeProbabilities<T> {
    pub fn sum(&self) -> T {
        self.p0 + self.p1 + self.p2
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.p0, self.p1, self.p2]
    }

    /// Probability that at least one detector clicks.
    pub fn clicked(&self) -> T {
        self.p1 + self.p2
    }
}

/// `|⟨ψ_a|ψ_b⟩|²` for two pure states.
pub fn overlap_sq<T: Scalar>(a: &PolarisationState<T>, b: &PolarisationState<T>) -> Result<T> {
    a.validate()?;
    b.validate()?;
    let half = T::of(0.5);
    let (sa, ca) = (a.theta * half).sin_cos();
    let (sb, cb) = (b.theta * half).sin_cos();
    let two = T::of(2.0);
    let raw =
        ca * ca * cb * cb + sa * sa * sb * sb + two * ca * cb * sa * sb * (a.phi - b.phi).cos();
    clamp_probability(raw)
}

/// Coincidence probability `½(1 − α |⟨ψ_a|ψ_b⟩|²)`.
pub fn coincidence_prob<T: Scalar>(
    a: &PolarisationState<T>,
    b: &PolarisationState<T>,
    alpha: T,
) -> Result<T> {
    validate_alpha(alpha)?;
    let overlap = overlap_sq(a, b)?;
    Ok(T::of(0.5) * (T::one() - alpha * overlap))
}

/// Coincidence probability for linear states a half angle θ′ apart:
/// `½(1 − α cos²θ′)`.
pub fn coincidence_prob_linear<T: Scalar>(params: &SystemParams<T>) -> T {
    let c = params.theta_prime.cos();
    T::of(0.5) * (T::one() - params.alpha * c * c)
}

/// Zero/one/two-click probabilities after independent loss γ on each photon.
pub fn outcome_probabilities<T: Scalar>(params: &SystemParams<T>) -> OutcomeProbabilities<T> {
    outcomes_unchecked(params.theta_prime, params.alpha, params.gamma)
}

/// Loss model without domain checks, also used by finite differences which
/// may step just outside the physical domain.
pub(crate) fn outcomes_unchecked<T: Scalar>(
    theta_prime: T,
    alpha: T,
    gamma: T,
) -> OutcomeProbabilities<T> {
    let c = theta_prime.cos();
    let pc = T::of(0.5) * (T::one() - alpha * c * c);
    let survive = T::one() - gamma;
    let p0 = gamma * gamma;
    let p2 = survive * survive * pc;
    let p1 = (T::one() - gamma * gamma) - p2;
    OutcomeProbabilities { p0, p1, p2 }
}

fn clamp_probability<T: Scalar>(raw: T) -> Result<T> {
    let tol = T::round_off();
    if raw < -tol || raw > T::one() + tol || raw.is_nan() {
        return Err(Error::ProbabilityExcursion(raw.as_f64()));
    }
    Ok(raw.max(T::zero()).min(T::one()))
}
