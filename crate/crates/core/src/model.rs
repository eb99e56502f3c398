use ndarray::ArrayView2;

use crate::error::Result;
use crate::scalar::Scalar;

/// Prediction side of the shared fit/predict contract.
pub trait Regressor<T: Scalar> {
    /// One prediction per row of `x`.
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>>;
}
