//! Small dense linear algebra: a row-major matrix, Cholesky solves and
//! Householder least squares. Sizes here stay in the low hundreds.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// New matrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let src = self.row(r);
            let dst = out.row_mut(r);
            for (d, &c) in dst.iter_mut().zip(cols) {
                *d = src[c];
            }
        }
        out
    }

    /// New matrix made of the listed rows.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Solves `A x = b` for symmetric positive definite `A` (n×n, row-major),
/// overwriting `a` with its Cholesky factor. Returns `None` when `A` is not
/// numerically positive definite.
pub fn cholesky_solve<T: Scalar>(a: &mut [T], n: usize, b: &[T]) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            let l = a[j * n + k];
            diag = diag - l * l;
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
    }
    // forward: L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - a[i * n + k] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    // backward: L^T x = y
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - a[k * n + i] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    if y.iter().all(|v| v.is_finite()) {
        Some(y)
    } else {
        None
    }
}

/// Least-squares solution of the overdetermined system `design · x ≈ rhs`
/// via Householder QR. Returns `None` if the design is rank deficient.
pub fn least_squares<T: Scalar>(design: &Matrix<T>, rhs: &[T]) -> Option<Vec<T>> {
    let m = design.rows();
    let n = design.cols();
    if m < n || rhs.len() != m {
        return None;
    }
    let mut a = design.clone();
    let mut b = rhs.to_vec();
    let mut scale = T::zero();
    for v in a.as_slice() {
        scale = scale.max(v.abs());
    }
    let tol = T::epsilon() * T::from_usize_lossy(m.max(n)) * scale.max(T::one());
    for k in 0..n {
        let mut norm = T::zero();
        for i in k..m {
            norm = norm + a.get(i, k) * a.get(i, k);
        }
        let norm = norm.sqrt();
        if norm <= tol {
            return None;
        }
        let alpha = if a.get(k, k) > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in column k below the diagonal
        let mut v: Vec<T> = (k..m).map(|i| a.get(i, k)).collect();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for j in k..n {
            let dot: T = (k..m).map(|i| v[i - k] * a.get(i, j)).sum();
            let f = two * dot / vnorm2;
            for i in k..m {
                let val = a.get(i, j) - f * v[i - k];
                a.set(i, j, val);
            }
        }
        let dot: T = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = two * dot / vnorm2;
        for i in k..m {
            b[i] = b[i] - f * v[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s = s - a.get(i, j) * x[j];
        }
        let d = a.get(i, i);
        if d.abs() <= tol {
            return None;
        }
        x[i] = s / d;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&mut a, 2, &[2.0, 1.0]).unwrap();
        // 4x + 2y = 2, 2x + 3y = 1 -> x = 0.5, y = 0
        assert!((x[0] - 0.5f64).abs() < 1e-14);
        assert!(x[1].abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_solve::<f64>(&mut a, 2, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn least_squares_fits_exact_line() {
        let design = Matrix::from_rows(&[
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
            vec![1.0, 4.0],
        ]);
        let x = least_squares(&design, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((x[0] - 1.0f64).abs() < 1e-12);
        assert!((x[1] - 2.0f64).abs() < 1e-12);
    }

    #[test]
    fn least_squares_detects_rank_deficiency() {
        let design = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        assert!(least_squares::<f64>(&design, &[1.0, 2.0, 3.0]).is_none());
    }
}
