//! Regularized least squares and the shared error metric.

use crate::error::{check_dim, Error, Result};
use crate::lorenz::EmbeddedDataset;
use crate::predictor::{Predictor, StorageCost};
use crate::scalar::{dot, Scalar};

/// Row-major `N x L` design matrix, targets and ridge parameter.
#[derive(Debug, Clone, Copy)]
pub struct RegressionProblem<'a, T> {
    pub design: &'a [T],
    pub dim: usize,
    pub desired: &'a [T],
    pub delta: T,
}

impl<'a, T: Scalar> RegressionProblem<'a, T> {
    pub fn from_dataset(ds: &'a EmbeddedDataset<T>, delta: T) -> Self {
        Self {
            design: ds.inputs_flat(),
            dim: ds.dim(),
            desired: ds.desired(),
            delta,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if self.desired.is_empty() {
            return Err(Error::Empty);
        }
        if self.design.len() != self.dim * self.desired.len() {
            return Err(Error::LengthMismatch {
                left: self.design.len(),
                right: self.dim * self.desired.len(),
            });
        }
        if !(self.delta >= T::zero()) || !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite and non-negative"));
        }
        if self.design.iter().chain(self.desired).any(|v| !v.is_finite()) {
            return Err(Error::invalid("problem", "entries must be finite"));
        }
        Ok(())
    }

    /// Returns `(delta I + X^T X, X^T d)` with the matrix stored row-major.
    pub fn normal_equations(&self) -> (Vec<T>, Vec<T>) {
        let l = self.dim;
        let mut a = vec![T::zero(); l * l];
        let mut b = vec![T::zero(); l];
        for (row, &d) in self.design.chunks_exact(l).zip(self.desired) {
            for i in 0..l {
                b[i] += row[i] * d;
                for j in 0..=i {
                    a[i * l + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..l {
            for j in 0..i {
                a[j * l + i] = a[i * l + j];
            }
            a[i * l + i] += self.delta;
        }
        (a, b)
    }
}

/// Linear model weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Empty);
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("weights", "must be finite"));
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn norm(&self) -> T {
        dot(&self.0, &self.0).sqrt()
    }

    /// `w^T x`.
    pub fn predict_linear(&self, x: &[T]) -> Result<T> {
        check_dim(self.0.len(), x.len())?;
        Ok(dot(&self.0, x))
    }
}

impl<T: Scalar> Predictor<T> for WeightVector<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        self.predict_linear(x)
    }
}

impl<T> StorageCost for WeightVector<T> {
    fn storage_scalars(&self) -> usize {
        self.0.len()
    }
}

/// In-place Cholesky factorization of a symmetric positive definite matrix.
/// The lower triangle of `a` is overwritten with `L` where `A = L L^T`.
fn cholesky<T: Scalar>(a: &mut [T], n: usize) -> Result<()> {
    let scale = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(T::zero(), T::max);
    let tol = T::epsilon() * T::from_usize_lossy(n) * scale;
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > tol) {
            return Err(Error::RankDeficient);
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / diag;
        }
    }
    Ok(())
}

fn cholesky_solve<T: Scalar>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `(delta I + X^T X) w = X^T d` by Cholesky factorization.
pub fn solve_regularized_ls<T: Scalar>(p: &RegressionProblem<'_, T>) -> Result<WeightVector<T>> {
    p.validate()?;
    let (mut a, mut b) = p.normal_equations();
    cholesky(&mut a, p.dim)?;
    cholesky_solve(&a, p.dim, &mut b);
    WeightVector::new(b).map_err(|_| Error::RankDeficient)
}

/// Mean squared error between predictions and targets.
pub fn mse<T: Scalar>(predictions: &[T], targets: &[T]) -> Result<T> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let sum: T = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(sum / T::from_usize_lossy(targets.len()))
}
