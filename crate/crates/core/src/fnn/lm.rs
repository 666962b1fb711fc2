//! Levenberg–Marquardt training.
//!
//! The damped normal equations `(JᵀJ + λI) Δ = Jᵀe` are assembled without
//! materialising the (rows·outputs) × params Jacobian: output-layer columns
//! of `J` are block sparse and share the hidden activations, so `JᵀJ` is
//! built from three per-row accumulators whose cost does not grow with the
//! number of outputs.

use serde::{Deserialize, Serialize};

use super::network::{FnnParams, NetworkShape};
use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::scalar::{sigmoid, Scalar};
use crate::seed::rng_from;
use crate::series::LagWindowDataset;

/// Damping above this value stops training.
pub const LAMBDA_CAP: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub gradient_tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            gradient_tol: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::invalid("max_epochs must be positive"));
        }
        if !(self.lambda_init > 0.0) || !(self.gradient_tol > 0.0) {
            return Err(Error::invalid("lambda_init and gradient_tol must be positive"));
        }
        if !(self.lambda_up > 1.0) || !(self.lambda_down > 1.0) {
            return Err(Error::invalid("lambda factors must exceed 1"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    Gradient,
    LambdaOverflow,
    ZeroError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Accepted steps.
    pub epochs_run: usize,
    pub final_mse: f64,
    /// Training MSE at initialisation and after every accepted step.
    pub mse_trace: Vec<f64>,
    pub converged_reason: StopReason,
    pub final_lambda: f64,
}

/// Damped-least-squares system at one parameter point.
pub(crate) struct NormalEquations<T> {
    /// params × params, row-major, symmetric.
    pub jtj: Vec<T>,
    pub jte: Vec<T>,
    pub sse: T,
}

fn check_dataset<T: Scalar>(ds: &LagWindowDataset<T>, shape: NetworkShape) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::invalid("empty training dataset"));
    }
    if ds.input_width() != shape.n_in || ds.target_width() != shape.n_out {
        return Err(Error::ShapeMismatch {
            expected: format!("{} inputs / {} outputs", shape.n_in, shape.n_out),
            got: format!("{} / {}", ds.input_width(), ds.target_width()),
        });
    }
    Ok(())
}

/// Sum of squared errors over all rows and outputs.
pub(crate) fn sse<T: Scalar>(params: &FnnParams<T>, ds: &LagWindowDataset<T>) -> T {
    let s = params.shape;
    let mut hidden = vec![T::zero(); s.n_hidden];
    let mut y = vec![T::zero(); s.n_out];
    let mut total = T::zero();
    for r in 0..ds.len() {
        params.hidden_activations(ds.inputs.row(r), &mut hidden);
        params.outputs_from_hidden(&hidden, &mut y);
        for (yh, &th) in y.iter().zip(ds.targets.row(r)) {
            let e = th - *yh;
            total = total + e * e;
        }
    }
    total
}

/// Builds `JᵀJ` and `Jᵀe` (with `e = target − output`) at `params`.
pub(crate) fn normal_equations<T: Scalar>(params: &FnnParams<T>, ds: &LagWindowDataset<T>) -> NormalEquations<T> {
    let s = params.shape;
    let (ni, nh, no) = (s.n_in, s.n_hidden, s.n_out);
    let hb = ni + 1;
    let ob = nh + 1;
    let ph = nh * hb;
    let p = s.param_count();

    // r_acc: ph × ph (upper triangle), c_acc: ph × ob, a_acc: ob × ob
    let mut r_acc = vec![T::zero(); ph * ph];
    let mut c_acc = vec![T::zero(); ph * ob];
    let mut a_acc = vec![T::zero(); ob * ob];
    let mut g_hidden = vec![T::zero(); ph];
    let mut g_out = vec![T::zero(); no * ob];
    let mut total = T::zero();

    let mut z = vec![T::one(); ob];
    let mut v = vec![T::zero(); ph];
    let mut e = vec![T::zero(); no];
    let mut y = vec![T::zero(); no];
    for r in 0..ds.len() {
        let x = ds.inputs.row(r);
        // hidden activations into z[..nh]; z[nh] stays 1
        for j in 0..nh {
            let w = params.hidden_weights.row(j);
            let net = w
                .iter()
                .zip(x)
                .fold(params.hidden_biases[j], |acc, (&wi, &xi)| acc + wi * xi);
            z[j] = sigmoid(net);
        }
        params.outputs_from_hidden(&z[..nh], &mut y);
        for ((eh, &yh), &th) in e.iter_mut().zip(&y).zip(ds.targets.row(r)) {
            *eh = th - yh;
            total = total + *eh * *eh;
        }
        for j in 0..nh {
            let u = z[j] * (T::one() - z[j]);
            let base = j * hb;
            for i in 0..ni {
                v[base + i] = u * x[i];
            }
            v[base + ni] = u;
        }
        for a in 0..ph {
            let va = v[a];
            let row = &mut r_acc[a * ph..(a + 1) * ph];
            for b in a..ph {
                row[b] = row[b] + va * v[b];
            }
            let crow = &mut c_acc[a * ob..(a + 1) * ob];
            for k in 0..ob {
                crow[k] = crow[k] + va * z[k];
            }
        }
        for a in 0..ob {
            for b in a..ob {
                a_acc[a * ob + b] = a_acc[a * ob + b] + z[a] * z[b];
            }
        }
        for h in 0..no {
            let g = &mut g_out[h * ob..(h + 1) * ob];
            for k in 0..ob {
                g[k] = g[k] + e[h] * z[k];
            }
        }
        for j in 0..nh {
            let q = (0..no).fold(T::zero(), |acc, h| acc + e[h] * params.output_weights.get(h, j));
            let base = j * hb;
            for i in 0..hb {
                g_hidden[base + i] = g_hidden[base + i] + q * v[base + i];
            }
        }
    }

    // G[j][j'] = Σ_h w_hj w_hj'
    let mut gram = vec![T::zero(); nh * nh];
    for j in 0..nh {
        for j2 in 0..nh {
            gram[j * nh + j2] = (0..no).fold(T::zero(), |acc, h| {
                acc + params.output_weights.get(h, j) * params.output_weights.get(h, j2)
            });
        }
    }

    let mut jtj = vec![T::zero(); p * p];
    for a in 0..ph {
        let ja = a / hb;
        for b in a..ph {
            let jb = b / hb;
            let val = gram[ja * nh + jb] * r_acc[a * ph + b];
            jtj[a * p + b] = val;
            jtj[b * p + a] = val;
        }
    }
    for h in 0..no {
        let off = ph + h * ob;
        for a in 0..ph {
            let w = params.output_weights.get(h, a / hb);
            for k in 0..ob {
                let val = w * c_acc[a * ob + k];
                jtj[a * p + off + k] = val;
                jtj[(off + k) * p + a] = val;
            }
        }
        for a in 0..ob {
            for b in a..ob {
                let val = a_acc[a * ob + b];
                jtj[(off + a) * p + off + b] = val;
                jtj[(off + b) * p + off + a] = val;
            }
        }
    }
    let mut jte = g_hidden;
    jte.extend(g_out);
    NormalEquations { jtj, jte, sse: total }
}

/// Trains a network by Levenberg–Marquardt from a uniform [−0.5, 0.5]
/// initialisation drawn from `cfg.seed`.
///
/// A step is kept only if it lowers the training MSE; otherwise λ grows by
/// `lambda_up` and the step is recomputed. Kept steps shrink λ by
/// `lambda_down`. Training stops after `max_epochs` kept steps, when the
/// largest gradient component falls below `gradient_tol`, when the error is
/// exactly zero, or when λ exceeds [`LAMBDA_CAP`].
pub fn train_lm<T: Scalar>(
    dataset: &LagWindowDataset<T>,
    shape: NetworkShape,
    cfg: &TrainConfig,
) -> Result<(FnnParams<T>, TrainReport)> {
    cfg.validate()?;
    check_dataset(dataset, shape)?;
    let mut rng = rng_from(cfg.seed);
    let init = FnnParams::random_uniform(shape, &mut rng);
    train_lm_from(dataset, init, cfg)
}

/// Levenberg–Marquardt from explicit starting parameters.
pub fn train_lm_from<T: Scalar>(
    dataset: &LagWindowDataset<T>,
    init: FnnParams<T>,
    cfg: &TrainConfig,
) -> Result<(FnnParams<T>, TrainReport)> {
    cfg.validate()?;
    let shape = init.shape;
    check_dataset(dataset, shape)?;
    let count = (dataset.len() * shape.n_out) as f64;
    let p = shape.param_count();

    let mut params = init;
    let mut flat = params.to_flat();
    let mut eqs = normal_equations(&params, dataset);
    let mut current = eqs.sse.to_f64_lossy() / count;
    if !current.is_finite() {
        return Err(Error::Training("non-finite initial error".into()));
    }
    let mut trace = vec![current];
    let mut lambda = cfg.lambda_init;
    let mut accepted = 0usize;
    let reason = 'outer: loop {
        if accepted >= cfg.max_epochs {
            break StopReason::MaxEpochs;
        }
        if current == 0.0 {
            break StopReason::ZeroError;
        }
        let gmax = eqs
            .jte
            .iter()
            .fold(0.0f64, |m, g| m.max(g.to_f64_lossy().abs()));
        if gmax < cfg.gradient_tol {
            break StopReason::Gradient;
        }
        loop {
            let mut damped = eqs.jtj.clone();
            let lam = T::lit(lambda);
            for d in 0..p {
                damped[d * p + d] = damped[d * p + d] + lam;
            }
            if let Some(step) = cholesky_solve(&mut damped, p, &eqs.jte) {
                let trial: Vec<T> = flat.iter().zip(&step).map(|(&a, &b)| a + b).collect();
                let trial_params = FnnParams::from_flat(shape, &trial)?;
                let trial_mse = sse(&trial_params, dataset).to_f64_lossy() / count;
                if trial_mse < current {
                    flat = trial;
                    params = trial_params;
                    current = trial_mse;
                    trace.push(current);
                    accepted += 1;
                    lambda /= cfg.lambda_down;
                    eqs = normal_equations(&params, dataset);
                    continue 'outer;
                }
            }
            lambda *= cfg.lambda_up;
            if lambda > LAMBDA_CAP {
                break 'outer StopReason::LambdaOverflow;
            }
        }
    };
    Ok((
        params,
        TrainReport {
            epochs_run: accepted,
            final_mse: current,
            mse_trace: trace,
            converged_reason: reason,
            final_lambda: lambda,
        },
    ))
}

/// Training MSE of `params` on `dataset` (mean over rows and outputs).
pub fn dataset_mse<T: Scalar>(params: &FnnParams<T>, dataset: &LagWindowDataset<T>) -> Result<f64> {
    check_dataset(dataset, params.shape)?;
    Ok(sse(params, dataset).to_f64_lossy() / (dataset.len() * params.shape.n_out) as f64)
}
