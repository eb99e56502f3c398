use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

/// Denominator floor for MAPE.
pub const MAPE_GUARD: f64 = 1e-8;

/// Hold-out errors of one grid cell. MSE is in squared target units, MAPE a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricPair<T> {
    pub mse: T,
    pub mape: T,
}

impl<T: Scalar> MetricPair<T> {
    pub fn evaluate(y: &[T], yhat: &[T]) -> Result<Self> {
        Ok(Self { mse: mse(y, yhat)?, mape: mape(y, yhat)? })
    }
}

fn check<T>(y: &[T], yhat: &[T]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::dim(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::Empty("metric input"));
    }
    Ok(())
}

pub fn mse<T: Scalar>(y: &[T], yhat: &[T]) -> Result<T> {
    check(y, yhat)?;
    let s: T = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(s / T::from_count(y.len()))
}

pub fn mape<T: Scalar>(y: &[T], yhat: &[T]) -> Result<T> {
    check(y, yhat)?;
    let guard = T::lit(MAPE_GUARD);
    let s: T = y.iter().zip(yhat).map(|(&a, &b)| (a - b).abs() / a.abs().max(guard)).sum();
    Ok(s / T::from_count(y.len()))
}

fn sign<T: Scalar>(v: T) -> i8 {
    if v > T::zero() {
        1
    } else if v < T::zero() {
        -1
    } else {
        0
    }
}

/// Share of months whose predicted change from `y_prev` has the sign of the actual change.
pub fn directional_accuracy<T: Scalar>(y: &[T], yhat: &[T], y_prev: &[T]) -> Result<T> {
    check(y, yhat)?;
    if y_prev.len() != y.len() {
        return Err(Error::dim(y.len(), y_prev.len()));
    }
    let hits = (0..y.len()).filter(|&i| sign(y[i] - y_prev[i]) == sign(yhat[i] - y_prev[i])).count();
    Ok(T::from_count(hits) / T::from_count(y.len()))
}

/// Independent per-metric minima over a row of cells.
pub fn row_min<T: Scalar>(row: &[MetricPair<T>]) -> MetricPair<T> {
    let pick = |f: fn(&MetricPair<T>) -> T| row.iter().map(f).min_by(cmp_scalar).unwrap_or_else(T::nan);
    MetricPair { mse: pick(|c| c.mse), mape: pick(|c| c.mape) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert!((mse(&[4.0f64, 4.2], &[4.1, 4.0]).unwrap() - 0.025).abs() < 1e-15);
        assert!((mape(&[4.0f64], &[4.2]).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(mse(&[1.0f64, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(mape(&[0.0f64], &[1.0]).unwrap().is_finite());
        assert!(mse::<f64>(&[], &[]).is_err());
        assert!(mape(&[1.0f64], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn direction() {
        let prev = [1.0f64, 1.0];
        assert_eq!(directional_accuracy(&[2.0, 0.0], &[2.0, 0.0], &prev).unwrap(), 1.0);
        assert_eq!(directional_accuracy(&[2.0, 0.0], &[3.0, 1.5], &prev).unwrap(), 0.5);
        assert_eq!(directional_accuracy(&[2.0, 0.0], &[1.0, 1.0], &prev).unwrap(), 0.0);
        assert_eq!(directional_accuracy(&[1.0, 1.0], &[1.0, 1.0], &prev).unwrap(), 1.0);
        assert!(directional_accuracy(&[1.0f64], &[1.0], &[]).is_err());
    }

    #[test]
    fn minima_are_per_metric() {
        let row = [
            MetricPair { mse: 0.3f64, mape: 0.01 },
            MetricPair { mse: 0.1, mape: 0.5 },
        ];
        assert_eq!(row_min(&row), MetricPair { mse: 0.1, mape: 0.01 });
        let same = [MetricPair { mse: 0.2f64, mape: 0.2 }; 6];
        assert_eq!(row_min(&same), same[0]);
    }
}
