//! The multi-step-ahead strategies: iterated, direct, MIMO, MISMO and
//! arbitrary horizon partitions, plus the mask ↔ partition codec.
//!
//! Every sub-model is identified by the horizon steps it predicts
//! (`start`, `len`) and seeded from that identity alone, so the same segment
//! fitted for two strategies yields the same network. [`SegmentFitter`]
//! exploits this with an optional cache shared by all strategies fitted on
//! one sample.

mod partition;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use partition::{decode_partition, BinaryMask, HorizonPartition};

use crate::error::{Error, Result};
use crate::featsel::{forward_backward_select, LagSelection, MAX_EMBEDDING};
use crate::fnn::{
    forward, kfold_cv, select_hidden_aic, CvScore, FnnParams, NetworkShape, TrainConfig,
    TrainReport, HIDDEN_CANDIDATES,
};
use crate::preprocess::Preprocessor;
use crate::scalar::Scalar;
use crate::seed_of;
use crate::series::{build_lag_dataset, ForecastResult, TimeSeries};

/// Model-selection settings shared by every sub-model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub candidate_lags: Vec<usize>,
    pub hidden_candidates: Vec<usize>,
    pub train: TrainConfig,
    /// Folds of the cross-validation diagnostic recorded for the chosen
    /// network; `0` disables it.
    pub cv_folds: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            candidate_lags: (1..=MAX_EMBEDDING).collect(),
            hidden_candidates: HIDDEN_CANDIDATES.to_vec(),
            train: TrainConfig::default(),
            cv_folds: 0,
        }
    }
}

/// One trained sub-model predicting horizon steps `start + 1 ..= start + len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentModel<T> {
    pub start: usize,
    pub len: usize,
    pub lags: LagSelection,
    pub shape: NetworkShape,
    pub params: FnnParams<T>,
    pub aic: f64,
    pub report: TrainReport,
    pub cv: Option<CvScore>,
    pub seed: u64,
}

impl<T: Scalar> SegmentModel<T> {
    pub fn target_offsets(&self) -> Vec<usize> {
        (self.start + 1..=self.start + self.len).collect()
    }
}

/// Fits sub-models on one (transformed) estimation sample.
#[derive(Debug)]
pub struct SegmentFitter<T> {
    series: TimeSeries<T>,
    settings: FitSettings,
    seed: u64,
    cache: Option<Mutex<HashMap<(usize, usize), Arc<SegmentModel<T>>>>>,
    fits: AtomicUsize,
}

impl<T: Scalar> SegmentFitter<T> {
    pub fn new(series: TimeSeries<T>, settings: FitSettings, seed: u64) -> Self {
        Self {
            series,
            settings,
            seed,
            cache: None,
            fits: AtomicUsize::new(0),
        }
    }

    /// Remembers every fitted segment; later requests for the same steps
    /// reuse it. Results are unchanged because segment seeds depend only on
    /// the steps predicted.
    pub fn with_cache(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn series(&self) -> &TimeSeries<T> {
        &self.series
    }

    pub fn settings(&self) -> &FitSettings {
        &self.settings
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of sub-models actually trained (cache hits excluded).
    pub fn fits(&self) -> usize {
        self.fits.load(Ordering::Relaxed)
    }

    pub fn segment(&self, start: usize, len: usize) -> Result<Arc<SegmentModel<T>>> {
        if let Some(cache) = &self.cache {
            if let Some(m) = cache.lock().expect("cache poisoned").get(&(start, len)) {
                return Ok(Arc::clone(m));
            }
        }
        let model = Arc::new(self.fit_segment(start, len)?);
        if let Some(cache) = &self.cache {
            cache
                .lock()
                .expect("cache poisoned")
                .entry((start, len))
                .or_insert_with(|| Arc::clone(&model));
        }
        Ok(model)
    }

    fn fit_segment(&self, start: usize, len: usize) -> Result<SegmentModel<T>> {
        if len == 0 {
            return Err(Error::invalid("segment length must be positive"));
        }
        self.fits.fetch_add(1, Ordering::Relaxed);
        let targets: Vec<usize> = (start + 1..=start + len).collect();
        let (lags, _) =
            forward_backward_select(&self.series, &self.settings.candidate_lags, &targets)?;
        let dataset = build_lag_dataset(&self.series, &lags.lags, &targets)?;
        let seed = seed_of!(self.seed, "segment", start, len);
        let cfg = self.settings.train.with_seed(seed);
        let best = select_hidden_aic(&dataset, &self.settings.hidden_candidates, &cfg)?;
        let cv = if self.settings.cv_folds >= 2 {
            Some(kfold_cv(&dataset, self.settings.cv_folds, best.shape, &cfg)?)
        } else {
            None
        };
        Ok(SegmentModel {
            start,
            len,
            lags,
            shape: best.shape,
            params: best.params,
            aic: best.aic,
            report: best.report,
            cv,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Iterated,
    Direct,
    Mimo,
    Mismo(usize),
    Partitioned(HorizonPartition),
}

impl StrategyKind {
    pub fn label(&self) -> String {
        match self {
            StrategyKind::Iterated => "iterated".into(),
            StrategyKind::Direct => "direct".into(),
            StrategyKind::Mimo => "mimo".into(),
            StrategyKind::Mismo(s) => format!("mismo-{s}"),
            StrategyKind::Partitioned(_) => "partitioned".into(),
        }
    }
}

/// Trained sub-models of one strategy plus the transform needed to return
/// forecasts to original units.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyModelSet<T> {
    pub label: String,
    pub horizon: usize,
    /// `None` for the iterated strategy.
    pub partition: Option<HorizonPartition>,
    pub segments: Vec<Arc<SegmentModel<T>>>,
    pub preprocessor: Option<Preprocessor<T>>,
    pub seed: u64,
}

impl<T: Scalar> StrategyModelSet<T> {
    pub fn is_iterated(&self) -> bool {
        self.partition.is_none()
    }

    pub fn with_preprocessor(mut self, p: Preprocessor<T>) -> Self {
        self.preprocessor = Some(p);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Largest lag any sub-model reads.
    pub fn max_lag(&self) -> usize {
        self.segments
            .iter()
            .flat_map(|s| s.lags.lags.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Fits one sub-model per segment of `partition`.
pub fn fit_partitioned<T: Scalar>(
    fitter: &SegmentFitter<T>,
    partition: &HorizonPartition,
) -> Result<StrategyModelSet<T>> {
    let segments = partition
        .starts()
        .into_iter()
        .zip(partition.segments())
        .enumerate()
        .map(|(j, (start, &len))| {
            fitter.segment(start, len).map_err(|e| Error::Segment {
                segment: j,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyModelSet {
        label: "partitioned".into(),
        horizon: partition.horizon(),
        partition: Some(partition.clone()),
        segments,
        preprocessor: None,
        seed: fitter.seed(),
    })
}

pub fn fit_strategy<T: Scalar>(
    kind: &StrategyKind,
    fitter: &SegmentFitter<T>,
    horizon: usize,
) -> Result<StrategyModelSet<T>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    let partition = match kind {
        StrategyKind::Iterated => {
            let one = fitter.segment(0, 1).map_err(|e| Error::Segment {
                segment: 0,
                source: Box::new(e),
            })?;
            return Ok(StrategyModelSet {
                label: kind.label(),
                horizon,
                partition: None,
                segments: vec![one],
                preprocessor: None,
                seed: fitter.seed(),
            });
        }
        StrategyKind::Direct => HorizonPartition::direct(horizon)?,
        StrategyKind::Mimo => HorizonPartition::mimo(horizon)?,
        StrategyKind::Mismo(s) => HorizonPartition::mismo(*s, horizon)?,
        StrategyKind::Partitioned(p) => {
            if p.horizon() != horizon {
                return Err(Error::ShapeMismatch {
                    expected: format!("partition of horizon {horizon}"),
                    got: p.horizon().to_string(),
                });
            }
            p.clone()
        }
    };
    Ok(fit_partitioned(fitter, &partition)?.with_label(kind.label()))
}

/// Origin of one value read into a network input window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowRead {
    /// Zero-based index into the supplied history.
    Observed(usize),
    /// Zero-based horizon step of an earlier prediction.
    Predicted(usize),
}

/// Forecast in model space (before inverse transform), reporting where
/// every input value came from.
pub fn forecast_traced<T: Scalar>(
    set: &StrategyModelSet<T>,
    history: &[T],
) -> Result<(Vec<T>, Vec<WindowRead>)> {
    let need = set.max_lag();
    if history.len() < need {
        return Err(Error::SeriesTooShort {
            what: "forecast history",
            needed: need,
            len: history.len(),
        });
    }
    let n = history.len();
    let mut reads = Vec::new();
    if set.is_iterated() {
        let model = &set.segments[0];
        let out = feedback_loop(history, &model.lags.lags, set.horizon, &mut reads, |x| {
            Ok(forward(&model.params, x)?[0])
        })?;
        return Ok((out, reads));
    }
    let mut out = Vec::with_capacity(set.horizon);
    for model in &set.segments {
        let x: Vec<T> = model
            .lags
            .lags
            .iter()
            .map(|&l| {
                reads.push(WindowRead::Observed(n - l));
                history[n - l]
            })
            .collect();
        out.extend(forward(&model.params, &x)?);
    }
    Ok((out, reads))
}

fn feedback_loop<T: Scalar>(
    history: &[T],
    lags: &[usize],
    horizon: usize,
    reads: &mut Vec<WindowRead>,
    mut step: impl FnMut(&[T]) -> Result<T>,
) -> Result<Vec<T>> {
    let n = history.len();
    let mut buffer = history.to_vec();
    for _ in 0..horizon {
        let len = buffer.len();
        let x: Vec<T> = lags
            .iter()
            .map(|&l| {
                let pos = len - l;
                reads.push(if pos < n {
                    WindowRead::Observed(pos)
                } else {
                    WindowRead::Predicted(pos - n)
                });
                buffer[pos]
            })
            .collect();
        buffer.push(step(&x)?);
    }
    Ok(buffer.split_off(n))
}

/// Applies a one-step predictor `horizon` times, appending each prediction
/// to the window as the newest observation.
pub fn iterate_one_step<T: Scalar>(
    history: &[T],
    lags: &[usize],
    horizon: usize,
    step: impl FnMut(&[T]) -> Result<T>,
) -> Result<Vec<T>> {
    if lags.iter().any(|&l| l == 0 || l > history.len()) {
        return Err(Error::SeriesTooShort {
            what: "forecast history",
            needed: lags.iter().copied().max().unwrap_or(0),
            len: history.len(),
        });
    }
    feedback_loop(history, lags, horizon, &mut Vec::new(), step)
}

/// H-step forecast in model space from the end of `history`.
pub fn forecast_model_space<T: Scalar>(set: &StrategyModelSet<T>, history: &[T]) -> Result<Vec<T>> {
    forecast_traced(set, history).map(|(v, _)| v)
}

/// H-step forecast following `last_observations` (model space), returned in
/// original units when the set carries its preprocessing.
pub fn forecast<T: Scalar>(
    set: &StrategyModelSet<T>,
    last_observations: &[T],
) -> Result<ForecastResult<T>> {
    let raw = forecast_model_space(set, last_observations)?;
    let values = match &set.preprocessor {
        Some(p) => p.invert_forecast(&raw),
        None => raw,
    };
    ForecastResult::new(values, set.label.clone(), set.seed)
}
