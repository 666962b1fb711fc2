use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{sigmoid, Scalar};

/// Hidden-layer sizes tried by model selection.
pub const HIDDEN_CANDIDATES: [usize; 5] = [2, 4, 6, 8, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkShape {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
}

impl NetworkShape {
    /// Shape with a hidden size from [`HIDDEN_CANDIDATES`].
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize) -> Result<Self> {
        if !HIDDEN_CANDIDATES.contains(&n_hidden) {
            return Err(Error::invalid(format!(
                "hidden size {n_hidden} not in {HIDDEN_CANDIDATES:?}"
            )));
        }
        Self::relaxed(n_in, n_hidden, n_out)
    }

    /// Shape with any positive hidden size.
    pub fn relaxed(n_in: usize, n_hidden: usize, n_out: usize) -> Result<Self> {
        if n_in == 0 || n_hidden == 0 || n_out == 0 {
            return Err(Error::invalid(format!(
                "layer sizes must be positive: {n_in}-{n_hidden}-{n_out}"
            )));
        }
        Ok(Self {
            n_in,
            n_hidden,
            n_out,
        })
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.n_hidden * (self.n_in + 1) + self.n_out * (self.n_hidden + 1)
    }
}

/// Weights and biases of a three-layer network with sigmoid hidden units and
/// linear outputs.
///
/// The flat parameter vector used by [`jacobian`] and the trainer lists, for
/// each hidden unit `j`, its input weights then its bias; then, for each
/// output `h`, its hidden weights then its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnParams<T> {
    pub shape: NetworkShape,
    /// n_hidden × n_in.
    pub hidden_weights: Matrix<T>,
    pub hidden_biases: Vec<T>,
    /// n_out × n_hidden.
    pub output_weights: Matrix<T>,
    pub output_biases: Vec<T>,
}

impl<T: Scalar> FnnParams<T> {
    pub fn zeros(shape: NetworkShape) -> Self {
        Self {
            shape,
            hidden_weights: Matrix::zeros(shape.n_hidden, shape.n_in),
            hidden_biases: vec![T::zero(); shape.n_hidden],
            output_weights: Matrix::zeros(shape.n_out, shape.n_hidden),
            output_biases: vec![T::zero(); shape.n_out],
        }
    }

    /// Every parameter drawn uniformly from [−0.5, 0.5].
    pub fn random_uniform<R: Rng>(shape: NetworkShape, rng: &mut R) -> Self {
        let flat: Vec<T> = (0..shape.param_count())
            .map(|_| T::lit(rng.gen_range(-0.5..=0.5)))
            .collect();
        Self::from_flat(shape, &flat).expect("length matches shape")
    }

    pub fn to_flat(&self) -> Vec<T> {
        let s = self.shape;
        let mut out = Vec::with_capacity(s.param_count());
        for j in 0..s.n_hidden {
            out.extend_from_slice(self.hidden_weights.row(j));
            out.push(self.hidden_biases[j]);
        }
        for h in 0..s.n_out {
            out.extend_from_slice(self.output_weights.row(h));
            out.push(self.output_biases[h]);
        }
        out
    }

    pub fn from_flat(shape: NetworkShape, flat: &[T]) -> Result<Self> {
        if flat.len() != shape.param_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", shape.param_count()),
                got: flat.len().to_string(),
            });
        }
        let mut p = Self::zeros(shape);
        let mut it = flat.iter().copied();
        for j in 0..shape.n_hidden {
            for w in p.hidden_weights.row_mut(j) {
                *w = it.next().expect("sized");
            }
            p.hidden_biases[j] = it.next().expect("sized");
        }
        for h in 0..shape.n_out {
            for w in p.output_weights.row_mut(h) {
                *w = it.next().expect("sized");
            }
            p.output_biases[h] = it.next().expect("sized");
        }
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    /// Hidden activations for input `x` (no shape check).
    pub(crate) fn hidden_activations(&self, x: &[T], out: &mut [T]) {
        for (j, o) in out.iter_mut().enumerate() {
            let w = self.hidden_weights.row(j);
            let net = w
                .iter()
                .zip(x)
                .fold(self.hidden_biases[j], |acc, (&wi, &xi)| acc + wi * xi);
            *o = sigmoid(net);
        }
    }

    pub(crate) fn outputs_from_hidden(&self, hidden: &[T], out: &mut [T]) {
        for (h, o) in out.iter_mut().enumerate() {
            let w = self.output_weights.row(h);
            *o = w
                .iter()
                .zip(hidden)
                .fold(self.output_biases[h], |acc, (&wi, &si)| acc + wi * si);
        }
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.shape.n_in {
            return Err(Error::ShapeMismatch {
                expected: format!("{} inputs", self.shape.n_in),
                got: x.len().to_string(),
            });
        }
        Ok(())
    }
}

/// Network output `y_h = Σ_j w^o_hj σ(Σ_i w^r_ji x_i + b^r_j) + b^o_h`.
pub fn forward<T: Scalar>(params: &FnnParams<T>, x: &[T]) -> Result<Vec<T>> {
    params.check_input(x)?;
    let mut hidden = vec![T::zero(); params.shape.n_hidden];
    params.hidden_activations(x, &mut hidden);
    let mut y = vec![T::zero(); params.shape.n_out];
    params.outputs_from_hidden(&hidden, &mut y);
    Ok(y)
}

/// Mean squared error `Σ (pred − target)² / H`.
pub fn mse<T: Scalar>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} values", target.len()),
            got: pred.len().to_string(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let sum: T = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(sum / T::from_usize_lossy(pred.len()))
}

/// Analytic Jacobian `∂y_h/∂θ_p` (n_out × param_count) in the flat order
/// documented on [`FnnParams`].
pub fn jacobian<T: Scalar>(params: &FnnParams<T>, x: &[T]) -> Result<Matrix<T>> {
    params.check_input(x)?;
    let s = params.shape;
    let mut sig = vec![T::zero(); s.n_hidden];
    params.hidden_activations(x, &mut sig);
    let hidden_block = s.n_in + 1;
    let out_block = s.n_hidden + 1;
    let p_hidden = s.n_hidden * hidden_block;
    let mut jac = Matrix::zeros(s.n_out, s.param_count());
    for h in 0..s.n_out {
        let row = jac.row_mut(h);
        for j in 0..s.n_hidden {
            let g = params.output_weights.get(h, j) * sig[j] * (T::one() - sig[j]);
            let base = j * hidden_block;
            for i in 0..s.n_in {
                row[base + i] = g * x[i];
            }
            row[base + s.n_in] = g;
        }
        let base = p_hidden + h * out_block;
        row[base..base + s.n_hidden].copy_from_slice(&sig);
        row[base + s.n_hidden] = T::one();
    }
    Ok(jac)
}
