//! Lag selection with the Delta test and forward–backward search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::series::{build_lag_dataset, TimeSeries};

/// Largest lag considered as a network input.
pub const MAX_EMBEDDING: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub lags: Vec<usize>,
    pub criterion_value: f64,
}

/// Index of the Euclidean nearest neighbour of each row (excluding itself),
/// smallest index on ties.
fn nearest_neighbours<T: Scalar>(inputs: &Matrix<T>, cols: &[usize]) -> Vec<usize> {
    let m = inputs.rows();
    let mut nn = vec![0usize; m];
    for i in 0..m {
        let xi = inputs.row(i);
        let mut best = T::infinity();
        let mut best_j = usize::MAX;
        for j in 0..m {
            if j == i {
                continue;
            }
            let xj = inputs.row(j);
            let mut d = T::zero();
            for &c in cols {
                let diff = xi[c] - xj[c];
                d = d + diff * diff;
                if d >= best {
                    break;
                }
            }
            if d < best {
                best = d;
                best_j = j;
            }
        }
        nn[i] = best_j;
    }
    nn
}

fn delta_from_neighbours<T: Scalar>(outputs: &Matrix<T>, nn: &[usize]) -> f64 {
    let m = outputs.rows();
    let s = outputs.cols() as f64;
    let mut total = 0.0;
    for (i, &j) in nn.iter().enumerate() {
        let d: f64 = outputs
            .row(i)
            .iter()
            .zip(outputs.row(j))
            .map(|(a, b)| {
                let e = (*a - *b).to_f64_lossy();
                e * e
            })
            .sum();
        total += d / s;
    }
    total / (2.0 * m as f64)
}

/// Multi-output Delta test: `(1 / 2M) Σ_i ‖y_i − y_NN(i)‖² / s`.
pub fn delta_test<T: Scalar>(inputs: &Matrix<T>, outputs: &Matrix<T>) -> Result<f64> {
    let m = inputs.rows();
    if m < 2 {
        return Err(Error::invalid(format!("delta test needs at least 2 rows, got {m}")));
    }
    if outputs.rows() != m {
        return Err(Error::ShapeMismatch {
            expected: format!("{m} output rows"),
            got: outputs.rows().to_string(),
        });
    }
    if outputs.cols() == 0 {
        return Err(Error::invalid("delta test needs at least one output"));
    }
    let cols: Vec<usize> = (0..inputs.cols()).collect();
    let nn = nearest_neighbours(inputs, &cols);
    Ok(delta_from_neighbours(outputs, &nn))
}

/// Search trace: every criterion evaluation and every accepted move.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionLedger {
    pub evaluations: usize,
    /// Evaluations per sweep; the first sweep scores single lags.
    pub sweep_evaluations: Vec<usize>,
    /// Criterion after the start and after each accepted move.
    pub accepted: Vec<(Vec<usize>, f64)>,
}

/// Forward–backward lag selection with the Delta test as criterion.
///
/// Every lag set is scored on the same rows (those admitting the largest
/// candidate lag), so criterion values are comparable. Starts from the best
/// single lag, then repeatedly applies the single addition or removal with the
/// lowest criterion while it strictly improves. Ties go to additions before
/// removals and then to the smaller lag.
pub fn forward_backward_select<T: Scalar>(
    series: &TimeSeries<T>,
    candidate_lags: &[usize],
    target_offsets: &[usize],
) -> Result<(LagSelection, SelectionLedger)> {
    if candidate_lags.is_empty() {
        return Err(Error::invalid("no candidate lags"));
    }
    if candidate_lags.iter().any(|&l| l == 0 || l > MAX_EMBEDDING) {
        return Err(Error::invalid(format!(
            "candidate lags must lie in 1..={MAX_EMBEDDING}"
        )));
    }
    let mut cands = candidate_lags.to_vec();
    cands.sort_unstable();
    cands.dedup();
    let ds = build_lag_dataset(series, &cands, target_offsets)?;
    if ds.len() < 2 {
        return Err(Error::SeriesTooShort {
            what: "lag selection (two complete windows)",
            needed: cands[cands.len() - 1] + target_offsets[target_offsets.len() - 1],
            len: series.len(),
        });
    }
    let mut ledger = SelectionLedger::default();
    let score = |cols: &[usize], ledger: &mut SelectionLedger| -> f64 {
        ledger.evaluations += 1;
        let nn = nearest_neighbours(&ds.inputs, cols);
        delta_from_neighbours(&ds.targets, &nn)
    };

    // start: best single lag
    let mut current: Vec<usize> = Vec::new();
    let mut current_value = f64::INFINITY;
    for c in 0..cands.len() {
        let v = score(&[c], &mut ledger);
        if v < current_value {
            current_value = v;
            current = vec![c];
        }
    }
    ledger.sweep_evaluations.push(cands.len());
    let lags_of = |cols: &[usize]| cols.iter().map(|&c| cands[c]).collect::<Vec<_>>();
    ledger.accepted.push((lags_of(&current), current_value));

    loop {
        let before = ledger.evaluations;
        let mut best: Option<(Vec<usize>, f64)> = None;
        // additions
        for c in 0..cands.len() {
            if current.contains(&c) {
                continue;
            }
            let mut trial = current.clone();
            trial.push(c);
            trial.sort_unstable();
            let v = score(&trial, &mut ledger);
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                best = Some((trial, v));
            }
        }
        // removals
        if current.len() > 1 {
            for &c in &current {
                let trial: Vec<usize> = current.iter().copied().filter(|&x| x != c).collect();
                let v = score(&trial, &mut ledger);
                if best.as_ref().map_or(true, |(_, b)| v < *b) {
                    best = Some((trial, v));
                }
            }
        }
        ledger.sweep_evaluations.push(ledger.evaluations - before);
        match best {
            Some((set, v)) if v < current_value => {
                current = set;
                current_value = v;
                ledger.accepted.push((lags_of(&current), current_value));
            }
            _ => break,
        }
    }
    Ok((
        LagSelection {
            lags: lags_of(&current),
            criterion_value: current_value,
        },
        ledger,
    ))
}
