//! Error-table correction of a trained predictor.
//!
//! Training stores, for every training input, the residual `e_i = d_i - y_i` of a
//! frozen base model. At query time the residual of the nearest stored input is
//! added to the base estimate. With a linear base and the `w ∘ x` metric this is
//! the augmented space linear model ([`AslmModel`]); any other base uses plain
//! euclidean lookup ([`AugmentedModel`]).

use crate::error::{check_dim, Result};
use crate::linear::{solve_regularized_ls, RegressionProblem, WeightVector};
use crate::lorenz::EmbeddedDataset;
use crate::neighbor::{Metric, NeighborIndex};
use crate::predictor::{Predictor, StorageCost};
use crate::quantizer::{build_quantized_table, quantize_sequential, Codebook};
use crate::scalar::Scalar;

/// Training residuals indexed by (possibly transformed) training inputs.
#[derive(Debug, Clone)]
pub struct ErrorTable<T> {
    index: NeighborIndex<T, T>,
}

/// An error table whose keys are codebook centers and whose payloads are
/// per-center mean residuals.
pub type QuantizedErrorTable<T> = ErrorTable<T>;

impl<T: Scalar> ErrorTable<T> {
    pub fn build(dim: usize, inputs: &[T], errors: Vec<T>, metric: Metric<T>) -> Result<Self> {
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(crate::Error::invalid("errors", "must be finite"));
        }
        Ok(Self {
            index: NeighborIndex::build(dim, inputs, errors, metric)?,
        })
    }

    /// Residual stored with the nearest key.
    pub fn lookup(&self, x: &[T]) -> Result<T> {
        self.index.nearest(x).map(|(e, _)| *e)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn index(&self) -> &NeighborIndex<T, T> {
        &self.index
    }

    pub fn errors(&self) -> &[T] {
        self.index.payloads()
    }

    pub fn metric(&self) -> &Metric<T> {
        self.index.metric()
    }
}

impl<T: Scalar> StorageCost for ErrorTable<T> {
    fn storage_scalars(&self) -> usize {
        self.index.len() * (self.index.dim() + 1)
    }
}

fn residuals<T: Scalar, P: Predictor<T>>(base: &P, train: &EmbeddedDataset<T>) -> Result<Vec<T>> {
    train
        .inputs()
        .zip(train.desired())
        .map(|(x, &d)| Ok(d - base.predict(x)?))
        .collect()
}

/// Least-squares weights plus an error table keyed by `w ∘ x`.
#[derive(Debug, Clone)]
pub struct AslmModel<T> {
    weights: WeightVector<T>,
    table: ErrorTable<T>,
}

impl<T: Scalar> AslmModel<T> {
    pub fn weights(&self) -> &WeightVector<T> {
        &self.weights
    }

    pub fn table(&self) -> &ErrorTable<T> {
        &self.table
    }
}

/// Fits the regularized LS weights and tabulates every training residual.
pub fn train_aslm<T: Scalar>(train: &EmbeddedDataset<T>, delta: T) -> Result<AslmModel<T>> {
    let weights = solve_regularized_ls(&RegressionProblem::from_dataset(train, delta))?;
    aslm_from_weights(weights, train)
}

/// Builds the unquantized table for already-fitted weights.
pub fn aslm_from_weights<T: Scalar>(weights: WeightVector<T>, train: &EmbeddedDataset<T>) -> Result<AslmModel<T>> {
    let errors = residuals(&weights, train)?;
    let metric = Metric::hadamard(weights.as_slice())?;
    let table = ErrorTable::build(train.dim(), train.inputs_flat(), errors, metric)?;
    Ok(AslmModel { weights, table })
}

/// Quantized variant: residuals averaged over a sequential codebook built in
/// `w ∘ x` space with radius `epsilon`.
pub fn train_qaslm<T: Scalar>(
    train: &EmbeddedDataset<T>,
    delta: T,
    epsilon: T,
) -> Result<(AslmModel<T>, Codebook<T>)> {
    let weights = solve_regularized_ls(&RegressionProblem::from_dataset(train, delta))?;
    qaslm_from_weights(weights, train, epsilon)
}

pub fn qaslm_from_weights<T: Scalar>(
    weights: WeightVector<T>,
    train: &EmbeddedDataset<T>,
    epsilon: T,
) -> Result<(AslmModel<T>, Codebook<T>)> {
    let errors = residuals(&weights, train)?;
    let metric = Metric::hadamard(weights.as_slice())?;
    let codebook = quantize_sequential(train.dim(), train.inputs_flat(), epsilon, &metric)?;
    let table = build_quantized_table(&codebook, &errors, metric)?;
    Ok((AslmModel { weights, table }, codebook))
}

/// `w^T x + e*`, with `e*` the residual of the nearest `w ∘ x_i`.
pub fn predict_aslm<T: Scalar>(m: &AslmModel<T>, x: &[T]) -> Result<T> {
    let y = m.weights.predict_linear(x)?;
    Ok(y + m.table.lookup(x)?)
}

impl<T: Scalar> Predictor<T> for AslmModel<T> {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        predict_aslm(self, x)
    }
}

impl<T: Scalar> StorageCost for AslmModel<T> {
    fn storage_scalars(&self) -> usize {
        self.weights.storage_scalars() + self.table.storage_scalars()
    }
}

/// Frozen base predictor plus an error table keyed by raw inputs.
#[derive(Debug, Clone)]
pub struct AugmentedModel<T, B> {
    base: B,
    table: ErrorTable<T>,
}

impl<T: Scalar, B> AugmentedModel<T, B> {
    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn table(&self) -> &ErrorTable<T> {
        &self.table
    }
}

/// Tabulates the residuals of `base` over `train`. The base must not change afterwards.
pub fn augment<T: Scalar, B: Predictor<T>>(base: B, train: &EmbeddedDataset<T>) -> Result<AugmentedModel<T, B>> {
    check_dim(base.dim(), train.dim())?;
    let errors = residuals(&base, train)?;
    augment_with_residuals(base, train, errors)
}

/// Same as [`augment`] when the residuals over `train` are already known.
pub fn augment_with_residuals<T: Scalar, B: Predictor<T>>(
    base: B,
    train: &EmbeddedDataset<T>,
    errors: Vec<T>,
) -> Result<AugmentedModel<T, B>> {
    check_dim(base.dim(), train.dim())?;
    let table = ErrorTable::build(train.dim(), train.inputs_flat(), errors, Metric::PlainL2)?;
    Ok(AugmentedModel { base, table })
}

/// Quantized augmentation: residuals averaged per center of a raw-space
/// sequential codebook with radius `epsilon`.
pub fn augment_quantized<T: Scalar, B: Predictor<T>>(
    base: B,
    train: &EmbeddedDataset<T>,
    epsilon: T,
) -> Result<(AugmentedModel<T, B>, Codebook<T>)> {
    check_dim(base.dim(), train.dim())?;
    let errors = residuals(&base, train)?;
    augment_quantized_with_residuals(base, train, &errors, epsilon)
}

pub fn augment_quantized_with_residuals<T: Scalar, B: Predictor<T>>(
    base: B,
    train: &EmbeddedDataset<T>,
    errors: &[T],
    epsilon: T,
) -> Result<(AugmentedModel<T, B>, Codebook<T>)> {
    check_dim(base.dim(), train.dim())?;
    let codebook = quantize_sequential(train.dim(), train.inputs_flat(), epsilon, &Metric::PlainL2)?;
    let table = build_quantized_table(&codebook, errors, Metric::PlainL2)?;
    Ok((AugmentedModel { base, table }, codebook))
}

/// `base(x) + e*`, with `e*` the residual of the nearest raw training input.
pub fn predict_augmented<T: Scalar, B: Predictor<T>>(m: &AugmentedModel<T, B>, x: &[T]) -> Result<T> {
    Ok(m.base.predict(x)? + m.table.lookup(x)?)
}

impl<T: Scalar, B: Predictor<T>> Predictor<T> for AugmentedModel<T, B> {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        predict_augmented(self, x)
    }
}

impl<T: Scalar, B: StorageCost> StorageCost for AugmentedModel<T, B> {
    fn storage_scalars(&self) -> usize {
        self.base.storage_scalars() + self.table.storage_scalars()
    }
}

/// One-nearest-neighbor regressor on the training desired values.
#[derive(Debug, Clone)]
pub struct KnnModel<T> {
    index: NeighborIndex<T, T>,
}

impl<T: Scalar> KnnModel<T> {
    /// Neighbor count; fixed at one.
    pub const K: usize = 1;

    pub fn index(&self) -> &NeighborIndex<T, T> {
        &self.index
    }
}

pub fn train_knn<T: Scalar>(train: &EmbeddedDataset<T>) -> Result<KnnModel<T>> {
    Ok(KnnModel {
        index: NeighborIndex::build(train.dim(), train.inputs_flat(), train.desired().to_vec(), Metric::PlainL2)?,
    })
}

pub fn predict_knn<T: Scalar>(m: &KnnModel<T>, x: &[T]) -> Result<T> {
    m.index.nearest(x).map(|(d, _)| *d)
}

impl<T: Scalar> Predictor<T> for KnnModel<T> {
    fn dim(&self) -> usize {
        self.index.dim()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        predict_knn(self, x)
    }
}

impl<T: Scalar> StorageCost for KnnModel<T> {
    fn storage_scalars(&self) -> usize {
        self.index.len() * (self.index.dim() + 1)
    }
}
