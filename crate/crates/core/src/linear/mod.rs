//! Linear regression by least squares and by stochastic gradient descent.

mod sgd;
mod svd;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

pub use sgd::{fit_sgd, SgdConfig};
pub use svd::{lstsq_min_norm, singular_values};

use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub weights: Array1<T>,
    pub intercept: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(weights: Array1<T>, intercept: T) -> Self {
        Self { weights, intercept }
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> T {
        row.dot(&self.weights) + self.intercept
    }
}

impl<T: Scalar> Regressor<T> for LinearModel<T> {
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        predict_linear(self, x)
    }
}

/// `x w + b`.
pub fn predict_linear<T: Scalar>(model: &LinearModel<T>, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
    if x.ncols() != model.weights.len() {
        return Err(Error::dim(model.weights.len(), x.ncols()));
    }
    Ok(x.rows().into_iter().map(|r| model.predict_row(r)).collect())
}

pub(crate) fn check_xy<T: Scalar>(x: ArrayView2<'_, T>, y: &[T]) -> Result<()> {
    if x.nrows() == 0 || y.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.nrows() != y.len() {
        return Err(Error::dim(x.nrows(), y.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::config("training data must be finite"));
    }
    Ok(())
}

/// Ordinary least squares with intercept.
///
/// Columns are centered and equilibrated, then solved by SVD in the
/// minimum-norm sense, so duplicated or constant columns are allowed.
pub fn fit_ols<T: Scalar>(x: ArrayView2<'_, T>, y: &[T]) -> Result<LinearModel<T>> {
    check_xy(x, y)?;
    let n = T::from_count(x.nrows());
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let y_mean = y.iter().copied().sum::<T>() / n;
    let mut centered: Array2<T> = &x - &x_mean;
    let norms: Vec<T> = centered.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    for (mut col, &nrm) in centered.columns_mut().into_iter().zip(&norms) {
        if nrm > T::zero() {
            col.mapv_inplace(|v| v / nrm);
        } else {
            col.fill(T::zero());
        }
    }
    let yc: Array1<T> = y.iter().map(|&v| v - y_mean).collect();
    let z = lstsq_min_norm(centered.view(), yc.view());
    let weights: Array1<T> = z
        .iter()
        .zip(&norms)
        .map(|(&zj, &nrm)| if nrm > T::zero() { zj / nrm } else { T::zero() })
        .collect();
    let intercept = y_mean - x_mean.dot(&weights);
    Ok(LinearModel { weights, intercept })
}
