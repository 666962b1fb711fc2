use serde::{Deserialize, Serialize};

use super::lm::{dataset_mse, train_lm, TrainConfig, TrainReport};
use super::network::{FnnParams, NetworkShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed_of;
use crate::series::LagWindowDataset;

/// `M·s·ln(MSE) + 2P`. The MSE is floored at the smallest positive `f64`
/// so a perfect fit still yields a finite score.
pub fn aic(mse: f64, observations: usize, params: usize) -> f64 {
    observations as f64 * mse.max(f64::MIN_POSITIVE).ln() + 2.0 * params as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFit<T> {
    pub shape: NetworkShape,
    pub aic: f64,
    pub params: FnnParams<T>,
    pub report: TrainReport,
}

/// Trains one network per hidden size and keeps the lowest AIC (ties to the
/// smaller size). Each candidate uses seed `hash(cfg.seed, hidden)`.
pub fn select_hidden_aic<T: Scalar>(
    dataset: &LagWindowDataset<T>,
    candidates: &[usize],
    cfg: &TrainConfig,
) -> Result<CandidateFit<T>> {
    if dataset.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() {
        return Err(Error::invalid("no hidden-size candidates"));
    }
    let obs = dataset.len() * dataset.target_width();
    let mut best: Option<CandidateFit<T>> = None;
    let mut last_err = None;
    for &hidden in &sorted {
        let shape = NetworkShape::new(dataset.input_width(), hidden, dataset.target_width())?;
        let task_cfg = cfg.with_seed(seed_of!(cfg.seed, "hidden", hidden));
        match train_lm(dataset, shape, &task_cfg) {
            Ok((params, report)) => {
                let score = aic(report.final_mse, obs, shape.param_count());
                if best.as_ref().map_or(true, |b| score < b.aic) {
                    best = Some(CandidateFit {
                        shape,
                        aic: score,
                        params,
                        report,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        Error::Training(format!(
            "every hidden-size candidate failed: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        ))
    })
}

/// Row indices of `k` contiguous folds; the first `rows % k` folds hold one
/// extra row.
pub fn fold_indices(rows: usize, k: usize) -> Vec<Vec<usize>> {
    let base = rows / k;
    let extra = rows % k;
    let mut start = 0;
    (0..k)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let idx = (start..start + len).collect();
            start += len;
            idx
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean_mse: f64,
    pub fold_mse: Vec<f64>,
}

/// Time-ordered k-fold cross-validation of a fixed network shape.
pub fn kfold_cv<T: Scalar>(
    dataset: &LagWindowDataset<T>,
    k: usize,
    shape: NetworkShape,
    cfg: &TrainConfig,
) -> Result<CvScore> {
    if k < 2 {
        return Err(Error::invalid(format!("k-fold needs k >= 2, got {k}")));
    }
    if dataset.len() < k {
        return Err(Error::SeriesTooShort {
            what: "k-fold cross-validation rows",
            needed: k - 1,
            len: dataset.len(),
        });
    }
    let folds = fold_indices(dataset.len(), k);
    let mut fold_mse = Vec::with_capacity(k);
    for (f, val_rows) in folds.iter().enumerate() {
        let train_rows: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        let train = dataset.subset(&train_rows);
        let val = dataset.subset(val_rows);
        let (params, _) = train_lm(&train, shape, &cfg.with_seed(seed_of!(cfg.seed, "fold", f)))?;
        fold_mse.push(dataset_mse(&params, &val)?);
    }
    Ok(CvScore {
        mean_mse: fold_mse.iter().sum::<f64>() / k as f64,
        fold_mse,
    })
}
