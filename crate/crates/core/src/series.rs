//! Series container, hold-out splitting and lag-window datasets.
//!
//! Lag offsets follow the forecasting convention used throughout the crate:
//! lag `1` is the anchor observation itself, lag `2` the one before it, and
//! so on. Target offset `k` is the observation `k` steps after the anchor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A named finite sequence of real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    name: String,
    values: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::SeriesTooShort {
                what: "a time series",
                needed: 0,
                len: 0,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { name, index });
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Leading `len` observations as a new series with the same name.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::invalid(format!(
                "prefix length {len} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            name: self.name.clone(),
            values: self.values[..len].to_vec(),
        })
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

/// How many trailing observations are reserved for out-of-sample scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub holdout_len: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { holdout_len: 18 }
    }
}

/// Splits off the trailing `holdout_len` observations.
pub fn split_holdout<T: Scalar>(
    series: &TimeSeries<T>,
    spec: SplitSpec,
) -> Result<(TimeSeries<T>, TimeSeries<T>)> {
    if spec.holdout_len == 0 {
        return Err(Error::invalid("holdout_len must be positive"));
    }
    if series.len() <= spec.holdout_len {
        return Err(Error::SeriesTooShort {
            what: "hold-out split",
            needed: spec.holdout_len,
            len: series.len(),
        });
    }
    let cut = series.len() - spec.holdout_len;
    let est = TimeSeries {
        name: series.name.clone(),
        values: series.values[..cut].to_vec(),
    };
    let hold = TimeSeries {
        name: series.name.clone(),
        values: series.values[cut..].to_vec(),
    };
    Ok((est, hold))
}

/// Supervised samples cut from one series: each row pairs a lag window with
/// a block of future values drawn from the same anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct LagWindowDataset<T> {
    pub inputs: Matrix<T>,
    pub targets: Matrix<T>,
    pub lag_offsets: Vec<usize>,
    pub target_offsets: Vec<usize>,
    /// Zero-based index of the anchor observation of every row, ascending.
    pub anchors: Vec<usize>,
}

impl<T: Scalar> LagWindowDataset<T> {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn input_width(&self) -> usize {
        self.inputs.cols()
    }

    pub fn target_width(&self) -> usize {
        self.targets.cols()
    }

    /// Dataset restricted to the given row indices (in the given order).
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select_rows(rows),
            targets: self.targets.select_rows(rows),
            lag_offsets: self.lag_offsets.clone(),
            target_offsets: self.target_offsets.clone(),
            anchors: rows.iter().map(|&r| self.anchors[r]).collect(),
        }
    }
}

fn check_offsets(offsets: &[usize], what: &str) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::invalid(format!("{what} must be nonempty")));
    }
    if offsets.contains(&0) {
        return Err(Error::invalid(format!("{what} must be positive")));
    }
    if offsets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("{what} must be strictly ascending")));
    }
    Ok(())
}

/// Anchors (zero-based) admitting every lag in `max_lag` and every target up
/// to `max_target` inside a series of length `len`.
pub(crate) fn anchor_range(len: usize, max_lag: usize, max_target: usize) -> std::ops::Range<usize> {
    let first = max_lag - 1;
    let end = len.saturating_sub(max_target);
    first..end.max(first)
}

/// Builds the lag-window dataset of `values`.
///
/// Row count is `len − max(lag) − max(target) + 1`; rows are ordered by anchor.
pub fn build_lag_dataset<T: Scalar>(
    series: &TimeSeries<T>,
    lag_offsets: &[usize],
    target_offsets: &[usize],
) -> Result<LagWindowDataset<T>> {
    check_offsets(lag_offsets, "lag offsets")?;
    check_offsets(target_offsets, "target offsets")?;
    let values = series.values();
    let max_lag = *lag_offsets.last().expect("nonempty");
    let max_target = *target_offsets.last().expect("nonempty");
    let anchors: Vec<usize> = anchor_range(values.len(), max_lag, max_target).collect();
    if anchors.is_empty() {
        return Err(Error::SeriesTooShort {
            what: "one complete lag window",
            needed: max_lag + max_target - 1,
            len: values.len(),
        });
    }
    let mut inputs = Matrix::zeros(anchors.len(), lag_offsets.len());
    let mut targets = Matrix::zeros(anchors.len(), target_offsets.len());
    for (r, &a) in anchors.iter().enumerate() {
        for (dst, &lag) in inputs.row_mut(r).iter_mut().zip(lag_offsets) {
            *dst = values[a + 1 - lag];
        }
        for (dst, &k) in targets.row_mut(r).iter_mut().zip(target_offsets) {
            *dst = values[a + k];
        }
    }
    Ok(LagWindowDataset {
        inputs,
        targets,
        lag_offsets: lag_offsets.to_vec(),
        target_offsets: target_offsets.to_vec(),
        anchors,
    })
}

/// Reads the lag window ending at the last observation of `history`.
pub fn lag_window<T: Scalar>(history: &[T], lag_offsets: &[usize]) -> Result<Vec<T>> {
    let max_lag = lag_offsets.iter().copied().max().unwrap_or(0);
    if max_lag > history.len() {
        return Err(Error::SeriesTooShort {
            what: "forecast lag window",
            needed: max_lag - 1,
            len: history.len(),
        });
    }
    let n = history.len();
    Ok(lag_offsets.iter().map(|&l| history[n - l]).collect())
}

/// An H-step forecast in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult<T> {
    pub horizon: usize,
    pub predictions: Vec<T>,
    pub strategy: String,
    pub seed: u64,
}

impl<T: Scalar> ForecastResult<T> {
    pub fn new(predictions: Vec<T>, strategy: impl Into<String>, seed: u64) -> Result<Self> {
        if predictions.is_empty() {
            return Err(Error::invalid("empty forecast"));
        }
        if let Some(i) = predictions.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                name: "forecast".into(),
                index: i,
            });
        }
        Ok(Self {
            horizon: predictions.len(),
            predictions,
            strategy: strategy.into(),
            seed,
        })
    }
}
