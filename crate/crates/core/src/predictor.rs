use crate::error::Result;
use crate::scalar::Scalar;

/// A trained model mapping an input vector to a scalar estimate.
pub trait Predictor<T: Scalar> {
    /// Input dimension expected by [`Predictor::predict`].
    fn dim(&self) -> usize;

    fn predict(&self, x: &[T]) -> Result<T>;
}

/// Predicts every input in order.
pub fn predict_all<'a, T, P, I>(model: &P, inputs: I) -> Result<Vec<T>>
where
    T: Scalar,
    P: Predictor<T> + ?Sized,
    I: IntoIterator<Item = &'a [T]>,
{
    inputs.into_iter().map(|x| model.predict(x)).collect()
}

impl<T: Scalar, P: Predictor<T> + ?Sized> Predictor<T> for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        (**self).predict(x)
    }
}

/// Number of scalars a trained model keeps for inference.
pub trait StorageCost {
    fn storage_scalars(&self) -> usize;
}

/// Predicts zero everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPredictor {
    pub dim: usize,
}

impl<T: Scalar> Predictor<T> for ZeroPredictor {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        crate::error::check_dim(self.dim, x.len())?;
        Ok(T::zero())
    }
}

impl StorageCost for ZeroPredictor {
    fn storage_scalars(&self) -> usize {
        0
    }
}
