//! Fisher information of the zero/one/two-click distribution with respect
//! to `[θ′, α, γ]`, its degenerate direction, the restricted `(θ′, γ)`
//! problem and the Cramér-Rao limit on the angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{outcomes_unchecked, validate_alpha, validate_gamma, SystemParams};
use crate::Scalar;

/// Symmetric 3×3 Fisher information matrix, rows and columns ordered
/// `(θ′, α, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix<T> {
    pub entries: [[T; 3]; 3],
}

impl<T: Scalar> FisherMatrix<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row][col]
    }

    /// Information on θ′ alone.
    pub fn theta_theta(&self) -> T {
        self.entries[0][0]
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn max_asymmetry(&self) -> T {
        let e = &self.entries;
        (e[0][1] - e[1][0])
            .abs()
            .max((e[0][2] - e[2][0]).abs())
            .max((e[1][2] - e[2][1]).abs())
    }

    /// Rows/columns `(θ′, γ)` only.
    pub fn restricted(&self) -> [[T; 2]; 2] {
        let e = &self.entries;
        [[e[0][0], e[0][2]], [e[2][0], e[2][2]]]
    }

    /// Eigenvalues in ascending order, by cyclic Jacobi rotations (absolute
    /// accuracy of order `ε‖F‖`, which resolves the null eigenvalue).
    pub fn eigenvalues(&self) -> [T; 3] {
        let mut a = self.entries;
        let two = T::of(2.0);
        for _ in 0..64 {
            let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
            let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
            if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p], a[q]);
                for k in 0..3 {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
            }
        }
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        d
    }
}

/// Lower bound `F⁻¹/N` on the covariance of unbiased `(θ′, γ)` estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBound<T> {
    pub matrix: [[T; 2]; 2],
    pub n_pairs: T,
}

impl<T: Scalar> CovarianceBound<T> {
    pub fn theta_std(&self) -> T {
        self.matrix[0][0].sqrt()
    }

    pub fn gamma_std(&self) -> T {
        self.matrix[1][1].sqrt()
    }
}

/// `1 − α cos²θ′`, written as `(1 − α) + α sin²θ′` so it stays accurate at
/// the dip bottom.
fn dip_depth<T: Scalar>(theta_prime: T, alpha: T) -> T {
    let s = theta_prime.sin();
    (T::one() - alpha) + alpha * s * s
}

fn check_fisher_domain<T: Scalar>(params: &SystemParams<T>) -> Result<T> {
    let depth = dip_depth(params.theta_prime(), params.alpha());
    if depth <= T::zero() {
        return Err(Error::Singular(
            "alpha cos^2(theta') = 1: no coincidences at the dip bottom",
        ));
    }
    Ok(depth)
}

/// Closed-form Fisher matrix.
///
/// With `x = cos²θ′`, `s = sin 2θ′` and the reduced prefactor
/// `b = (1−γ)²(1+γ) / ((1−αx)(1+3γ+(1−γ)αx))`, so that `κ = α² b`:
///
/// ```text
///  F = b · | α²s²            −α s x              −2α s (1−αx)/(1−γ²)       |
///          | −α s x           x²                  2x (1−αx)/(1−γ²)         |
///          | −2α s (1−αx)/(1−γ²)  2x(1−αx)/(1−γ²)  8(1−αx)/((1−γ²)(1−γ)²)  |
/// ```
///
/// This is the usual `κ, χ` form with the `α` factors cancelled, which keeps
/// it finite at `α = 0`.
pub fn fisher_matrix<T: Scalar>(params: &SystemParams<T>) -> Result<FisherMatrix<T>> {
    let depth = check_fisher_domain(params)?;
    let (t, a, g) = (params.theta_prime(), params.alpha(), params.gamma());
    let one = T::one();
    let two = T::of(2.0);
    let c = t.cos();
    let x = c * c;
    let s = (two * t).sin();
    let survive = one - g;
    let b = survive * survive * (one + g) / (depth * (one + T::of(3.0) * g + survive * a * x));
    let chi_r = two * depth / (one - g * g);

    let f11 = b * a * a * s * s;
    let f12 = -b * a * s * x;
    let f13 = -b * a * s * chi_r;
    let f22 = b * x * x;
    let f23 = b * x * chi_r;
    let f33 = b * T::of(4.0) * chi_r / (survive * survive);
    Ok(FisherMatrix {
        entries: [[f11, f12, f13], [f12, f22, f23], [f13, f23, f33]],
    })
}

/// Information on θ′ alone, evaluated directly.
pub fn fisher_theta<T: Scalar>(params: &SystemParams<T>) -> Result<T> {
    let depth = check_fisher_domain(params)?;
    let (t, a, g) = (params.theta_prime(), params.alpha(), params.gamma());
    let one = T::one();
    let c = t.cos();
    let x = c * c;
    let s = (T::of(2.0) * t).sin();
    let survive = one - g;
    Ok(survive * survive * (one + g) * a * a * s * s
        / (depth * (one + T::of(3.0) * g + survive * a * x)))
}

#[derive(Clone, Copy)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

/// Fisher matrix from `Σ_k P_k ∂_i log P_k ∂_j log P_k` with the log
/// derivatives taken by finite differences of the outcome model.
///
/// Central differences in the interior; a parameter closer than `step` to
/// the boundary of its domain (α ∈ [0, 1], γ ∈ [0, 1)) uses a second-order
/// one-sided stencil pointing inwards.
pub fn numerical_fisher<T: Scalar>(params: &SystemParams<T>, step: T) -> Result<FisherMatrix<T>> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let base = params.as_vector();
    let probs = outcomes_unchecked(base[0], base[1], base[2]).as_array();
    let floor = T::underflow_floor();
    if let Some(&p) = probs.iter().find(|&&p| p < floor) {
        return Err(Error::Underflow(p.as_f64()));
    }

    let stencils = [
        Stencil::Central,
        bounded_stencil(base[1], step, T::zero(), T::one()),
        bounded_stencil(base[2], step, T::zero(), T::one()),
    ];

    let log_probs = |v: [T; 3]| -> Result<[T; 3]> {
        let p = outcomes_unchecked(v[0], v[1], v[2]).as_array();
        let mut out = [T::zero(); 3];
        for k in 0..3 {
            if !(p[k] >= floor) {
                return Err(Error::Underflow(p[k].as_f64()));
            }
            out[k] = p[k].ln();
        }
        Ok(out)
    };
    let shifted = |i: usize, delta: T| {
        let mut v = base;
        v[i] = v[i] + delta;
        v
    };

    // grad[i][k] = ∂_i log P_k
    let mut grad = [[T::zero(); 3]; 3];
    let two = T::of(2.0);
    for i in 0..3 {
        let d = match stencils[i] {
            Stencil::Central => {
                let up = log_probs(shifted(i, step))?;
                let dn = log_probs(shifted(i, -step))?;
                let mut d = [T::zero(); 3];
                for k in 0..3 {
                    d[k] = (up[k] - dn[k]) / (two * step);
                }
                d
            }
            Stencil::Forward | Stencil::Backward => {
                let sign = if matches!(stencils[i], Stencil::Forward) {
                    T::one()
                } else {
                    -T::one()
                };
                let f0 = log_probs(base)?;
                let f1 = log_probs(shifted(i, sign * step))?;
                let f2 = log_probs(shifted(i, sign * two * step))?;
                let mut d = [T::zero(); 3];
                for k in 0..3 {
                    d[k] = sign * (-T::of(3.0) * f0[k] + T::of(4.0) * f1[k] - f2[k]) / (two * step);
                }
                d
            }
        };
        grad[i] = d;
    }

    let mut entries = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            entries[i][j] =
                (0..3).fold(T::zero(), |acc, k| acc + probs[k] * grad[i][k] * grad[j][k]);
        }
    }
    Ok(FisherMatrix { entries })
}

fn bounded_stencil<T: Scalar>(value: T, step: T, lo: T, hi: T) -> Stencil {
    if value - step < lo {
        Stencil::Forward
    } else if value + step >= hi {
        Stencil::Backward
    } else {
        Stencil::Central
    }
}

/// Direction `[1/(2α), tan θ′, 0]` along which α and θ′ trade off without
/// changing any outcome probability to first order.
pub fn null_direction<T: Scalar>(params: &SystemParams<T>) -> Result<[T; 3]> {
    let a = params.alpha();
    if a == T::zero() {
        return Err(Error::Singular("alpha = 0"));
    }
    let c = params.theta_prime().cos();
    if c.abs() <= T::epsilon() {
        return Err(Error::Singular("tan(theta') pole at theta' = ±π/2"));
    }
    Ok([
        T::one() / (T::of(2.0) * a),
        params.theta_prime().tan(),
        T::zero(),
    ])
}

/// Fisher matrix of the `(θ′, γ)` problem with α held fixed.
pub fn restricted_fisher<T: Scalar>(params: &SystemParams<T>) -> Result<[[T; 2]; 2]> {
    let f = fisher_matrix(params)?;
    let r = f.restricted();
    invert_2x2(&r)?;
    Ok(r)
}

fn invert_2x2<T: Scalar>(m: &[[T; 2]; 2]) -> Result<[[T; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0] * m[1][1]).abs().max((m[0][1] * m[1][0]).abs());
    let tiny = T::epsilon() * T::of(64.0);
    // a diagonal entry lost in round-off next to the other one is as
    // singular as a vanishing determinant
    let (d0, d1) = (m[0][0].abs(), m[1][1].abs());
    if !(det.abs() > scale * tiny) || !(d0 > tiny * d1) || !(d1 > tiny * d0) {
        return Err(Error::Singular("restricted (theta', gamma) Fisher matrix"));
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// `F⁻¹/N` for the restricted `(θ′, γ)` problem.
pub fn covariance_bound<T: Scalar>(
    params: &SystemParams<T>,
    n_pairs: T,
) -> Result<CovarianceBound<T>> {
    if !(n_pairs >= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "n_pairs must be >= 1, got {n_pairs}"
        )));
    }
    let inv = invert_2x2(&restricted_fisher(params)?)?;
    let mut matrix = inv;
    for row in matrix.iter_mut() {
        for x in row.iter_mut() {
            *x = *x / n_pairs;
        }
    }
    Ok(CovarianceBound { matrix, n_pairs })
}

/// `|F⁻¹_{θ′γ}| / √(F⁻¹_{θ′θ′} F⁻¹_{γγ})` of the restricted problem.
pub fn theta_gamma_correlation<T: Scalar>(params: &SystemParams<T>) -> Result<T> {
    let inv = invert_2x2(&restricted_fisher(params)?)?;
    Ok((inv[0][1] / (inv[0][0] * inv[1][1]).sqrt()).abs())
}

/// Angle in (0, π/2) of maximal information on θ′ for given α and γ.
///
/// A 1° grid brackets the maximum; golden-section search then narrows the
/// bracket to 1e-10 rad (or the float resolution, if coarser). `−θ′_MF`
/// is equally optimal.
pub fn max_fisher_angle<T: Scalar>(alpha: T, gamma: T) -> Result<T> {
    validate_alpha(alpha)?;
    validate_gamma(gamma)?;
    if alpha == T::zero() {
        return Err(Error::ZeroInformation);
    }
    let info = |t: T| -> T {
        SystemParams::new(t, alpha, gamma)
            .and_then(|p| fisher_theta(&p))
            .unwrap_or(T::zero())
    };

    let deg = T::PI() / T::of(180.0);
    let (mut best, mut best_val) = (1usize, info(deg));
    for i in 2..90 {
        let v = info(T::of(i as f64) * deg);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    let mut lo = T::of((best - 1) as f64) * deg;
    let mut hi = T::of((best + 1) as f64) * deg;

    let inv_phi = T::of(0.618_033_988_749_894_8);
    let tol = T::of(1e-10).max(T::epsilon() * T::of(4.0));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (info(x1), info(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = info(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = info(x1);
        }
    }
    Ok((lo + hi) / T::of(2.0))
}

/// Cramér-Rao standard deviation `1/√(N F_θ′θ′)` for `n_pairs` pairs.
pub fn crb_std<T: Scalar>(params: &SystemParams<T>, n_pairs: T) -> Result<T> {
    if !(n_pairs >= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "n_pairs must be >= 1, got {n_pairs}"
        )));
    }
    let f = fisher_theta(params)?;
    if !(f > T::zero()) {
        return Err(Error::ZeroInformation);
    }
    Ok(T::one() / (n_pairs * f).sqrt())
}
