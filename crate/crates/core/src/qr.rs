//! Householder QR for slim design matrices.
//!
//! The factorization is computed once per design; permutation replications
//! only re-apply Qᵀ to a shuffled response, which keeps the resampling loop
//! cheap.

use ndarray::{Array2, ArrayView2};

use crate::scalar::Scalar;

pub(crate) struct ThinQr<S> {
    /// Packed factor: R on and above the diagonal, Householder vectors
    /// (with implicit unit head) below it.
    packed: Array2<S>,
    tau: Vec<S>,
    rows: usize,
    cols: usize,
}

impl<S: Scalar> ThinQr<S> {
    pub fn factor(x: ArrayView2<'_, S>) -> Self {
        let (n, p) = x.dim();
        assert!(n >= p, "need at least as many rows as columns");
        let mut a = x.to_owned();
        let mut tau = vec![S::zero(); p];
        for j in 0..p {
            let mut norm2 = S::zero();
            for i in j..n {
                norm2 += a[[i, j]] * a[[i, j]];
            }
            let norm = norm2.sqrt();
            if norm == S::zero() {
                continue;
            }
            let alpha = a[[j, j]];
            let beta = if alpha >= S::zero() { -norm } else { norm };
            tau[j] = (beta - alpha) / beta;
            let scale = (alpha - beta).recip();
            for i in j + 1..n {
                a[[i, j]] = a[[i, j]] * scale;
            }
            a[[j, j]] = beta;
            for k in j + 1..p {
                let mut w = a[[j, k]];
                for i in j + 1..n {
                    w += a[[i, j]] * a[[i, k]];
                }
                let t = tau[j] * w;
                a[[j, k]] = a[[j, k]] - t;
                for i in j + 1..n {
                    let vij = a[[i, j]];
                    a[[i, k]] = a[[i, k]] - t * vij;
                }
            }
        }
        Self {
            packed: a,
            tau,
            rows: n,
            cols: p,
        }
    }

    pub fn r_diag(&self, j: usize) -> S {
        self.packed[[j, j]]
    }

    /// Indices of columns whose pivot collapsed, i.e. columns linearly
    /// dependent on their predecessors up to `rel_tol` of the largest pivot.
    pub fn deficient_columns(&self, rel_tol: S) -> Vec<usize> {
        let max = (0..self.cols)
            .map(|j| self.r_diag(j).abs())
            .fold(S::zero(), S::max);
        let tol = max * rel_tol;
        (0..self.cols)
            .filter(|j| self.r_diag(*j).abs() <= tol)
            .collect()
    }

    /// Overwrite `y` (length `rows`) with Qᵀy.
    pub fn qt_apply(&self, y: &mut [S]) {
        debug_assert_eq!(y.len(), self.rows);
        for j in 0..self.cols {
            if self.tau[j] == S::zero() {
                continue;
            }
            let mut w = y[j];
            for i in j + 1..self.rows {
                w += self.packed[[i, j]] * y[i];
            }
            let t = self.tau[j] * w;
            y[j] = y[j] - t;
            for i in j + 1..self.rows {
                y[i] = y[i] - t * self.packed[[i, j]];
            }
        }
    }

    /// Back-substitute R b = head(qty).
    pub fn solve(&self, qty: &[S]) -> Vec<S> {
        let p = self.cols;
        let mut b = vec![S::zero(); p];
        for j in (0..p).rev() {
            let mut acc = qty[j];
            for k in j + 1..p {
                acc = acc - self.packed[[j, k]] * b[k];
            }
            b[j] = acc / self.packed[[j, j]];
        }
        b
    }
}
