//! Standard and Allan deviations of estimate series, block-size tables and
//! inverse-variance curves.
//!
//! Series are plain real numbers; estimates live in [0, π/2] so no circular
//! statistics are needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::fisher_theta;
use crate::model::SystemParams;
use crate::Scalar;

/// Ordered angle estimates in radians, with the acquisition time per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSeries<T> {
    pub values: Vec<T>,
    /// Seconds of acquisition behind each value.
    pub duration: f64,
    pub label: String,
}

impl<T: Scalar> EstimateSeries<T> {
    pub fn new(values: Vec<T>, duration: f64, label: impl Into<String>) -> Self {
        Self {
            values,
            duration,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> Result<T> {
        mean(&self.values)
    }

    pub fn standard_deviation(&self) -> Result<T> {
        standard_deviation(&self.values)
    }

    pub fn allan_deviation(&self, tau_samples: usize) -> Result<T> {
        allan_deviation(&self.values, tau_samples)
    }
}

pub fn mean<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(values.iter().fold(T::zero(), |a, &v| a + v) / T::of(values.len() as f64))
}

/// Bessel-corrected sample variance.
pub fn variance<T: Scalar>(values: &[T]) -> Result<T> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    // shifted by the first sample so a constant series gives exactly zero
    let shift = values[0];
    let n = T::of(values.len() as f64);
    let m = values.iter().fold(T::zero(), |a, &v| a + (v - shift)) / n;
    let ss = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - shift - m) * (v - shift - m));
    Ok(ss / (n - T::one()))
}

pub fn standard_deviation<T: Scalar>(values: &[T]) -> Result<T> {
    Ok(variance(values)?.sqrt())
}

/// Means of consecutive non-overlapping blocks; a short tail is dropped.
pub fn block_means<T: Scalar>(values: &[T], size: usize) -> Result<Vec<T>> {
    if size == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    values.chunks_exact(size).map(mean).collect()
}

/// Non-overlapping Allan deviation `√(½⟨(θ̄_{n+1} − θ̄_n)²⟩)` over blocks of
/// `tau_samples` samples.
pub fn allan_deviation<T: Scalar>(values: &[T], tau_samples: usize) -> Result<T> {
    if tau_samples == 0 {
        return Err(Error::InvalidArgument("tau must be >= 1 sample".into()));
    }
    let needed = 2 * tau_samples;
    if values.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: values.len(),
        });
    }
    let means = block_means(values, tau_samples)?;
    let diffs = means.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0]));
    let n = T::of((means.len() - 1) as f64);
    let msd = diffs.fold(T::zero(), |a, d| a + d) / n;
    Ok((msd / T::of(2.0)).sqrt())
}

/// Deviations of block means for one block size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow<T> {
    pub size: usize,
    pub blocks: usize,
    pub std_of_means: T,
    pub allan_of_means: T,
}

/// Standard and Allan deviation of block means for each size. Sizes that
/// leave fewer than two blocks are omitted; size 0 is an error.
pub fn deviation_vs_sample_size<T: Scalar>(
    values: &[T],
    sizes: &[usize],
) -> Result<Vec<DeviationRow<T>>> {
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("sample sizes must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let blocks = values.len() / size;
        if blocks < 2 {
            continue;
        }
        let means = block_means(values, size)?;
        rows.push(DeviationRow {
            size,
            blocks,
            std_of_means: standard_deviation(&means)?,
            allan_of_means: allan_deviation(values, size)?,
        });
    }
    Ok(rows)
}

/// Least-squares line with the standard error of its slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub slope_stderr: T,
}

impl<T: Scalar> LineFit<T> {
    /// Slope in units of its standard error.
    pub fn t_statistic(&self) -> T {
        self.slope / self.slope_stderr
    }
}

/// Weighted least squares of `y` on `x`. The slope error is the usual
/// residual-scaled estimate and needs at least three points.
pub fn weighted_line_fit<T: Scalar>(x: &[T], y: &[T], w: &[T]) -> Result<LineFit<T>> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::InvalidArgument("fit inputs differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    let sw = w.iter().fold(T::zero(), |a, &v| a + v);
    let xm = x.iter().zip(w).fold(T::zero(), |a, (&xi, &wi)| a + wi * xi) / sw;
    let ym = y.iter().zip(w).fold(T::zero(), |a, (&yi, &wi)| a + wi * yi) / sw;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for i in 0..x.len() {
        sxx = sxx + w[i] * (x[i] - xm) * (x[i] - xm);
        sxy = sxy + w[i] * (x[i] - xm) * (y[i] - ym);
    }
    if !(sxx > T::zero()) {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let mut rss = T::zero();
    for i in 0..x.len() {
        let r = y[i] - intercept - slope * x[i];
        rss = rss + w[i] * r * r;
    }
    let dof = T::of((x.len() - 2) as f64);
    // weights normalised to the number of points
    let scale = T::of(x.len() as f64) / sw;
    let slope_stderr = (rss * scale / dof / (sxx * scale)).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Ordinary least-squares trend of a series against its sample index.
pub fn linear_trend<T: Scalar>(values: &[T]) -> Result<LineFit<T>> {
    let x: Vec<T> = (0..values.len()).map(|i| T::of(i as f64)).collect();
    let w = vec![T::one(); values.len()];
    weighted_line_fit(&x, values, &w)
}

/// Which deviation column of a [`DeviationRow`] to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deviation {
    Standard,
    Allan,
}

/// Log-log slope of deviation against block size, each point weighted by
/// its number of block differences (the inverse variance of the log
/// deviation, up to a constant).
pub fn loglog_slope<T: Scalar>(rows: &[DeviationRow<T>], which: Deviation) -> Result<LineFit<T>> {
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    let mut w = Vec::with_capacity(rows.len());
    for r in rows {
        let d = match which {
            Deviation::Standard => r.std_of_means,
            Deviation::Allan => r.allan_of_means,
        };
        if !(d > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "deviation at size {} is not positive",
                r.size
            )));
        }
        x.push(T::of(r.size as f64).ln());
        y.push(d.ln());
        w.push(T::of((r.blocks - 1) as f64));
    }
    weighted_line_fit(&x, &y, &w)
}

/// Empirical and predicted information at one scan angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseVarianceRow<T> {
    pub angle: T,
    /// `1/(N · Var θ̃′)` in rad⁻².
    pub inverse_variance: T,
    /// Single-parameter Fisher information at the angle, rad⁻².
    pub predicted: T,
}

/// Minimum replicates per angle for [`inverse_variance_curve`].
pub const MIN_REPLICATES: usize = 100;

/// Inverse variance of the estimator times the pair number, next to the
/// predicted Fisher information, for each scanned angle.
pub fn inverse_variance_curve<T: Scalar>(
    scan_estimates: &[(T, EstimateSeries<T>)],
    n_pairs: T,
    alpha: T,
    gamma: T,
) -> Result<Vec<InverseVarianceRow<T>>> {
    if !(n_pairs > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "n_pairs must be > 0, got {n_pairs}"
        )));
    }
    scan_estimates
        .iter()
        .map(|(angle, series)| {
            if series.len() < MIN_REPLICATES {
                return Err(Error::InsufficientData {
                    needed: MIN_REPLICATES,
                    got: series.len(),
                });
            }
            let var = variance(&series.values)?;
            if !(var > T::zero()) {
                return Err(Error::ZeroVariance(angle.as_f64()));
            }
            let params = SystemParams::new(*angle, alpha, gamma)?;
            let predicted = fisher_theta(&params)?;
            Ok(InverseVarianceRow {
                angle: *angle,
                inverse_variance: T::one() / (n_pairs * var),
                predicted,
            })
        })
        .collect()
}
