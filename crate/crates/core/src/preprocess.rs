//! Min–max scaling, Mann–Kendall trend detection and polynomial detrending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::scalar::Scalar;

/// Linear map of `[min, max]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams<T> {
    pub min: T,
    pub max: T,
}

pub fn minmax_fit<T: Scalar>(values: &[T]) -> Result<ScaleParams<T>> {
    let mut it = values.iter().copied();
    let first = it
        .next()
        .ok_or_else(|| Error::Degenerate("cannot fit scaling on an empty series".into()))?;
    let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::Degenerate(format!(
            "constant series (all values {min}) has zero range"
        )));
    }
    Ok(ScaleParams { min, max })
}

pub fn minmax_apply<T: Scalar>(params: &ScaleParams<T>, values: &[T]) -> Vec<T> {
    let range = params.max - params.min;
    values.iter().map(|&v| (v - params.min) / range).collect()
}

pub fn minmax_invert<T: Scalar>(params: &ScaleParams<T>, values: &[T]) -> Vec<T> {
    let range = params.max - params.min;
    values.iter().map(|&v| v * range + params.min).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannKendall {
    pub s: i64,
    pub z: f64,
    pub trending: bool,
}

/// Two-sided Mann–Kendall test at α = 0.05 (|z| > 1.96), with tie-corrected
/// variance and the ±1 continuity correction.
pub fn mann_kendall<T: Scalar>(values: &[T]) -> Result<MannKendall> {
    let n = values.len();
    if n < 4 {
        return Err(Error::SeriesTooShort {
            what: "Mann-Kendall test",
            needed: 3,
            len: n,
        });
    }
    let mut s: i64 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if values[j] > values[i] {
                s += 1;
            } else if values[j] < values[i] {
                s -= 1;
            }
        }
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    let z = if var <= 0.0 || s == 0 {
        0.0
    } else if s > 0 {
        (s as f64 - 1.0) / var.sqrt()
    } else {
        (s as f64 + 1.0) / var.sqrt()
    };
    Ok(MannKendall {
        s,
        z,
        trending: z.abs() > 1.96,
    })
}

/// Polynomial in the 1-based time index, coefficients in ascending power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel<T> {
    pub degree: usize,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> TrendModel<T> {
    /// Trend value at time index `t` (1-based), by Horner's rule.
    pub fn eval(&self, t: usize) -> T {
        let x = T::from_usize_lossy(t);
        self.coefficients
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }
}

/// Least-squares polynomial trend over t = 1..n; returns residuals and trend.
pub fn detrend_poly<T: Scalar>(values: &[T], degree: usize) -> Result<(Vec<T>, TrendModel<T>)> {
    let n = values.len();
    if n <= degree + 1 {
        return Err(Error::RankDeficient { degree, len: n });
    }
    let mut design = Matrix::zeros(n, degree + 1);
    for r in 0..n {
        let t = T::from_usize_lossy(r + 1);
        let mut p = T::one();
        for c in 0..=degree {
            design.set(r, c, p);
            p = p * t;
        }
    }
    let coefficients =
        least_squares(&design, values).ok_or(Error::RankDeficient { degree, len: n })?;
    let trend = TrendModel {
        degree,
        coefficients,
    };
    let residuals = values
        .iter()
        .enumerate()
        .map(|(i, &v)| v - trend.eval(i + 1))
        .collect();
    Ok((residuals, trend))
}

/// Adds the trend back; `start` is the 1-based time index of `residuals[0]`.
pub fn retrend<T: Scalar>(trend: &TrendModel<T>, residuals: &[T], start: usize) -> Vec<T> {
    residuals
        .iter()
        .enumerate()
        .map(|(i, &r)| r + trend.eval(start + i))
        .collect()
}

/// Preprocessing decisions fitted on an estimation sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor<T> {
    pub scale: ScaleParams<T>,
    pub trend: Option<TrendModel<T>>,
    pub mann_kendall: MannKendall,
    /// Length of the sample the transform was fitted on; forecasts continue
    /// the time index from here.
    pub fitted_len: usize,
    /// Deseasonalization is a pass-through hook; always `false` here.
    pub deseasonalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub detrend_degree: usize,
    pub detrend: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            detrend_degree: 1,
            detrend: true,
        }
    }
}

impl<T: Scalar> Preprocessor<T> {
    /// Scales to [0, 1], then removes a polynomial trend when the
    /// Mann–Kendall test flags one. Returns the transformed sample.
    pub fn fit(estimation: &[T], cfg: PreprocessConfig) -> Result<(Self, Vec<T>)> {
        let scale = minmax_fit(estimation)?;
        let scaled = minmax_apply(&scale, estimation);
        let mk = mann_kendall(&scaled)?;
        let (transformed, trend) = if cfg.detrend && mk.trending {
            let (res, trend) = detrend_poly(&scaled, cfg.detrend_degree)?;
            (res, Some(trend))
        } else {
            (scaled, None)
        };
        Ok((
            Self {
                scale,
                trend,
                mann_kendall: mk,
                fitted_len: estimation.len(),
                deseasonalized: false,
            },
            transformed,
        ))
    }

    /// Maps model-space values back to original units. `start` is the
    /// 1-based time index of `values[0]` relative to the fitted sample.
    pub fn invert(&self, values: &[T], start: usize) -> Vec<T> {
        let untrended = match &self.trend {
            Some(t) => retrend(t, values, start),
            None => values.to_vec(),
        };
        minmax_invert(&self.scale, &untrended)
    }

    /// Inverse transform of an H-step forecast following the fitted sample.
    pub fn invert_forecast(&self, values: &[T]) -> Vec<T> {
        self.invert(values, self.fitted_len + 1)
    }
}
