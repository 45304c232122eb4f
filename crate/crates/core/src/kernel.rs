//! Kernel least mean squares with a Gaussian kernel, and its quantized form.

use crate::error::{check_dim, Error, Result};
use crate::lorenz::EmbeddedDataset;
use crate::predictor::{Predictor, StorageCost};
use crate::scalar::{squared_distance, Scalar};

/// Kernel width and step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig<T> {
    pub sigma: T,
    pub eta: T,
}

impl<T: Scalar> Default for KernelConfig<T> {
    fn default() -> Self {
        Self {
            sigma: T::one(),
            eta: T::lit(0.7),
        }
    }
}

impl<T: Scalar> KernelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma", "must be positive and finite"));
        }
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(Error::invalid("eta", "must be positive and finite"));
        }
        Ok(())
    }

    #[inline]
    fn kernel_of_sq(&self, d2: T) -> T {
        (-d2 / (T::lit(2.0) * self.sigma * self.sigma)).exp()
    }
}

/// `exp(-|a - b|^2 / (2 sigma^2))`.
pub fn gaussian_kernel<T: Scalar>(a: &[T], b: &[T], sigma: T) -> Result<T> {
    check_dim(a.len(), b.len())?;
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    Ok((-squared_distance(a, b) / (T::lit(2.0) * sigma * sigma)).exp())
}

/// Kernel expansion `f(x) = sum_j a_j k(c_j, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KlmsModel<T> {
    dim: usize,
    centers: Vec<T>,
    coefficients: Vec<T>,
    config: KernelConfig<T>,
}

impl<T: Scalar> KlmsModel<T> {
    pub fn empty(dim: usize, config: KernelConfig<T>) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        Ok(Self {
            dim,
            centers: Vec::new(),
            coefficients: Vec::new(),
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn config(&self) -> KernelConfig<T> {
        self.config
    }

    pub fn centers_flat(&self) -> &[T] {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[T] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        for a in &mut out.coefficients {
            *a *= c;
        }
        out
    }

    fn push(&mut self, x: &[T], coefficient: T) {
        self.centers.extend_from_slice(x);
        self.coefficients.push(coefficient);
    }

    fn eval(&self, x: &[T]) -> T {
        let mut y = T::zero();
        for (c, &a) in self.centers.chunks_exact(self.dim).zip(&self.coefficients) {
            y += a * self.config.kernel_of_sq(squared_distance(c, x));
        }
        y
    }
}

/// One online pass: each sample becomes a center with coefficient
/// `eta * (d_n - f_{n-1}(x_n))`.
pub fn train_klms<T: Scalar>(train: &EmbeddedDataset<T>, config: KernelConfig<T>) -> Result<KlmsModel<T>> {
    let mut m = KlmsModel::empty(train.dim(), config)?;
    for (x, &d) in train.inputs().zip(train.desired()) {
        let e = d - m.eval(x);
        m.push(x, config.eta * e);
    }
    Ok(m)
}

/// Quantized KLMS: a sample within `epsilon` of its nearest center updates that
/// center's coefficient instead of adding a new center.
pub fn train_qklms<T: Scalar>(
    train: &EmbeddedDataset<T>,
    config: KernelConfig<T>,
    epsilon: T,
) -> Result<KlmsModel<T>> {
    if !(epsilon >= T::zero()) {
        return Err(Error::invalid("epsilon", "must be non-negative"));
    }
    let mut m = KlmsModel::empty(train.dim(), config)?;
    for (x, &d) in train.inputs().zip(train.desired()) {
        let mut y = T::zero();
        let mut nearest: Option<(usize, T)> = None;
        for (j, (c, &a)) in m.centers.chunks_exact(m.dim).zip(&m.coefficients).enumerate() {
            let d2 = squared_distance(c, x);
            y += a * config.kernel_of_sq(d2);
            if nearest.map_or(true, |(_, b)| d2 < b) {
                nearest = Some((j, d2));
            }
        }
        let update = config.eta * (d - y);
        match nearest {
            Some((j, d2)) if d2.sqrt() <= epsilon => m.coefficients[j] += update,
            _ => m.push(x, update),
        }
    }
    Ok(m)
}

pub fn predict_klms<T: Scalar>(m: &KlmsModel<T>, x: &[T]) -> Result<T> {
    check_dim(m.dim, x.len())?;
    Ok(m.eval(x))
}

impl<T: Scalar> Predictor<T> for KlmsModel<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        predict_klms(self, x)
    }
}

impl<T> StorageCost for KlmsModel<T> {
    fn storage_scalars(&self) -> usize {
        self.centers.len() + self.coefficients.len()
    }
}
