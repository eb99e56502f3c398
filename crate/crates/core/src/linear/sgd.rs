use ndarray::{Array1, ArrayView2};
use rand::seq::SliceRandom;

use super::{check_xy, LinearModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// Squared-loss SGD settings.
///
/// Inputs are expected to be scaled; on raw indicator magnitudes the
/// per-sample steps overshoot and training diverges.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub epochs: usize,
    pub initial_step: f64,
    /// Step at update `t` is `initial_step / t^decay`.
    pub decay: f64,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { epochs: 1000, initial_step: 0.01, decay: 0.25, l2_penalty: 1e-4, seed: 0 }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("sgd epochs must be >= 1"));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::config("sgd initial_step must be > 0"));
        }
        if !(self.l2_penalty >= 0.0) || !self.decay.is_finite() {
            return Err(Error::config("sgd l2_penalty must be >= 0 and decay finite"));
        }
        Ok(())
    }
}

/// Per-sample SGD from zero weights, reshuffling each epoch from `cfg.seed`.
pub fn fit_sgd<T: Scalar>(x: ArrayView2<'_, T>, y: &[T], cfg: &SgdConfig) -> Result<LinearModel<T>> {
    cfg.validate()?;
    check_xy(x, y)?;
    let mut rng = seed::rng_from(cfg.seed);
    let mut w = Array1::<T>::zeros(x.ncols());
    let mut b = T::zero();
    let eta0 = T::lit(cfg.initial_step);
    let decay = T::lit(cfg.decay);
    let l2 = T::lit(cfg.l2_penalty);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut t = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = eta0 / T::from_count(t).powf(decay);
            let row = x.row(i);
            let err = row.dot(&w) + b - y[i];
            // w <- w - eta * (err * x + l2 * w)
            w.mapv_inplace(|wj| wj * (T::one() - eta * l2));
            w.scaled_add(-eta * err, &row);
            b -= eta * err;
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                model: "SGDRegressor",
                detail: format!("non-finite weights after epoch {}", epoch + 1),
            });
        }
    }
    Ok(LinearModel { weights: w, intercept: b })
}
