//! Column-wise feature scaling: six transforms with fit, apply and invert.
//!
//! Parameters are estimated from training rows only. Degenerate columns
//! (zero spread) store a unit scale so the transform reduces to a shift.

mod power;
mod quantile;

use std::fmt::{self, Write as _};

use ndarray::{Array2, ArrayView2, Axis};

pub use power::{
    fit_lambda, log_likelihood, shift_offset, yeo_johnson, yeo_johnson_inverse, yeo_johnson_shifted,
    yeo_johnson_shifted_inverse,
};
pub use quantile::{empirical_cdf, inverse_cdf, quantile_linear};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalerKind {
    ZScore,
    RobustMedianIqr,
    QuantileUniform,
    PowerYeoJohnson,
    MinMaxUnit,
    MaxAbsUnit,
}

impl ScalerKind {
    /// Report column order.
    pub const ALL: [ScalerKind; 6] = [
        ScalerKind::ZScore,
        ScalerKind::RobustMedianIqr,
        ScalerKind::QuantileUniform,
        ScalerKind::PowerYeoJohnson,
        ScalerKind::MinMaxUnit,
        ScalerKind::MaxAbsUnit,
    ];

    /// Conventional display name (the scikit-learn class it corresponds to).
    pub fn label(self) -> &'static str {
        match self {
            ScalerKind::ZScore => "StandardScaler",
            ScalerKind::RobustMedianIqr => "RobustScaler",
            ScalerKind::QuantileUniform => "QuantileTransformer",
            ScalerKind::PowerYeoJohnson => "PowerTransformer",
            ScalerKind::MinMaxUnit => "MinMaxScaler",
            ScalerKind::MaxAbsUnit => "MaxAbsScaler",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap_or(0)
    }

    /// Affine kinds: `(x - shift) / scale` with data-independent form.
    pub fn is_affine(self) -> bool {
        matches!(
            self,
            ScalerKind::ZScore
                | ScalerKind::RobustMedianIqr
                | ScalerKind::MinMaxUnit
                | ScalerKind::MaxAbsUnit
        )
    }

    /// Kinds whose inverse is exact everywhere.
    pub fn is_invertible(self) -> bool {
        self != ScalerKind::QuantileUniform
    }
}

impl fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalerParams<T> {
    ZScore { mean: Vec<T>, stddev: Vec<T> },
    RobustMedianIqr { median: Vec<T>, iqr: Vec<T> },
    QuantileUniform { references: Vec<Vec<T>> },
    /// `post_mean` is taken over [`yeo_johnson_shifted`] values.
    PowerYeoJohnson { lambda: Vec<T>, post_mean: Vec<T>, post_stddev: Vec<T> },
    MinMaxUnit { min: Vec<T>, range: Vec<T> },
    MaxAbsUnit { max_abs: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedScaler<T> {
    params: ScalerParams<T>,
    n_cols: usize,
}

fn positive_or_one<T: Scalar>(s: T) -> T {
    if s > T::zero() && s.is_finite() {
        s
    } else {
        T::one()
    }
}

fn mean_std<T: Scalar>(col: &[T]) -> (T, T) {
    let n = T::from_count(col.len());
    let mean = col.iter().copied().sum::<T>() / n;
    let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// Estimates the parameters of `kind` from the rows of `train`.
pub fn fit_scaler<T: Scalar>(kind: ScalerKind, train: ArrayView2<'_, T>) -> Result<FittedScaler<T>> {
    if train.nrows() < 2 {
        return Err(Error::config(format!(
            "scaler fit needs at least 2 rows, got {}",
            train.nrows()
        )));
    }
    if train.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("scaler fit requires finite values"));
    }
    let columns: Vec<Vec<T>> = train.axis_iter(Axis(1)).map(|c| c.to_vec()).collect();
    let params = match kind {
        ScalerKind::ZScore => {
            let (mean, stddev) = columns
                .iter()
                .map(|c| {
                    let (m, s) = mean_std(c);
                    (m, positive_or_one(s))
                })
                .unzip();
            ScalerParams::ZScore { mean, stddev }
        }
        ScalerKind::RobustMedianIqr => {
            let (median, iqr) = columns
                .iter()
                .map(|c| {
                    let s = quantile::sorted(c.iter().copied());
                    let q1 = quantile_linear(&s, T::lit(0.25));
                    let q3 = quantile_linear(&s, T::lit(0.75));
                    (quantile_linear(&s, T::lit(0.5)), positive_or_one(q3 - q1))
                })
                .unzip();
            ScalerParams::RobustMedianIqr { median, iqr }
        }
        ScalerKind::QuantileUniform => ScalerParams::QuantileUniform {
            references: columns.iter().map(|c| quantile::sorted(c.iter().copied())).collect(),
        },
        ScalerKind::PowerYeoJohnson => {
            let mut lambda = Vec::with_capacity(columns.len());
            let mut post_mean = Vec::with_capacity(columns.len());
            let mut post_stddev = Vec::with_capacity(columns.len());
            for c in &columns {
                let l = fit_lambda(c);
                let t: Vec<T> = c.iter().map(|&x| yeo_johnson_shifted(x, l)).collect();
                let (m, s) = mean_std(&t);
                lambda.push(l);
                post_mean.push(m);
                post_stddev.push(positive_or_one(s));
            }
            ScalerParams::PowerYeoJohnson { lambda, post_mean, post_stddev }
        }
        ScalerKind::MinMaxUnit => {
            let (min, range) = columns
                .iter()
                .map(|c| {
                    let lo = c.iter().copied().fold(T::infinity(), T::min);
                    let hi = c.iter().copied().fold(T::neg_infinity(), T::max);
                    (lo, positive_or_one(hi - lo))
                })
                .unzip();
            ScalerParams::MinMaxUnit { min, range }
        }
        ScalerKind::MaxAbsUnit => ScalerParams::MaxAbsUnit {
            max_abs: columns
                .iter()
                .map(|c| positive_or_one(c.iter().fold(T::zero(), |a, &x| a.max(x.abs()))))
                .collect(),
        },
    };
    Ok(FittedScaler { params, n_cols: train.ncols() })
}

impl<T: Scalar> FittedScaler<T> {
    pub fn kind(&self) -> ScalerKind {
        match self.params {
            ScalerParams::ZScore { .. } => ScalerKind::ZScore,
            ScalerParams::RobustMedianIqr { .. } => ScalerKind::RobustMedianIqr,
            ScalerParams::QuantileUniform { .. } => ScalerKind::QuantileUniform,
            ScalerParams::PowerYeoJohnson { .. } => ScalerKind::PowerYeoJohnson,
            ScalerParams::MinMaxUnit { .. } => ScalerKind::MinMaxUnit,
            ScalerParams::MaxAbsUnit { .. } => ScalerKind::MaxAbsUnit,
        }
    }

    pub fn params(&self) -> &ScalerParams<T> {
        &self.params
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Forward map of a single value in column `j`.
    pub fn apply_value(&self, j: usize, x: T) -> T {
        match &self.params {
            ScalerParams::ZScore { mean, stddev } => (x - mean[j]) / stddev[j],
            ScalerParams::RobustMedianIqr { median, iqr } => (x - median[j]) / iqr[j],
            ScalerParams::QuantileUniform { references } => empirical_cdf(&references[j], x),
            ScalerParams::PowerYeoJohnson { lambda, post_mean, post_stddev } => {
                (yeo_johnson_shifted(x, lambda[j]) - post_mean[j]) / post_stddev[j]
            }
            ScalerParams::MinMaxUnit { min, range } => (x - min[j]) / range[j],
            ScalerParams::MaxAbsUnit { max_abs } => x / max_abs[j],
        }
    }

    /// Inverse map of a single value in column `j`.
    pub fn invert_value(&self, j: usize, y: T) -> T {
        match &self.params {
            ScalerParams::ZScore { mean, stddev } => y * stddev[j] + mean[j],
            ScalerParams::RobustMedianIqr { median, iqr } => y * iqr[j] + median[j],
            ScalerParams::QuantileUniform { references } => inverse_cdf(&references[j], y),
            ScalerParams::PowerYeoJohnson { lambda, post_mean, post_stddev } => {
                yeo_johnson_shifted_inverse(y * post_stddev[j] + post_mean[j], lambda[j])
            }
            ScalerParams::MinMaxUnit { min, range } => y * range[j] + min[j],
            ScalerParams::MaxAbsUnit { max_abs } => y * max_abs[j],
        }
    }

    fn map(&self, m: ArrayView2<'_, T>, f: impl Fn(usize, T) -> T) -> Result<Array2<T>> {
        if m.ncols() != self.n_cols {
            return Err(Error::dim(self.n_cols, m.ncols()));
        }
        let mut out = m.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|x| f(j, x));
        }
        Ok(out)
    }

    pub fn apply(&self, m: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.map(m, |j, x| self.apply_value(j, x))
    }

    pub fn invert(&self, m: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.map(m, |j, y| self.invert_value(j, y))
    }

    /// Plain-text parameter dump, one line per column.
    pub fn audit_text(&self, names: &[String]) -> String {
        let mut out = format!("scaler {}\n", self.kind().label());
        for j in 0..self.n_cols {
            let name = names.get(j).map_or("?", String::as_str);
            let _ = match &self.params {
                ScalerParams::ZScore { mean, stddev } => {
                    writeln!(out, "{name} mean={:e} stddev={:e}", mean[j], stddev[j])
                }
                ScalerParams::RobustMedianIqr { median, iqr } => {
                    writeln!(out, "{name} median={:e} iqr={:e}", median[j], iqr[j])
                }
                ScalerParams::QuantileUniform { references } => {
                    let r = &references[j];
                    writeln!(out, "{name} n={} min={:e} max={:e}", r.len(), r[0], r[r.len() - 1])
                }
                ScalerParams::PowerYeoJohnson { lambda, post_mean, post_stddev } => writeln!(
                    out,
                    "{name} lambda={:e} post_mean={:e} post_stddev={:e}",
                    lambda[j], post_mean[j], post_stddev[j]
                ),
                ScalerParams::MinMaxUnit { min, range } => {
                    writeln!(out, "{name} min={:e} max={:e}", min[j], min[j] + range[j])
                }
                ScalerParams::MaxAbsUnit { max_abs } => writeln!(out, "{name} max_abs={:e}", max_abs[j]),
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::reference_dataset;
    use ndarray::array;

    #[test]
    fn robust_on_one_to_four() {
        let m = array![[1.0f64], [2.0], [3.0], [4.0]];
        let s = fit_scaler(ScalerKind::RobustMedianIqr, m.view()).unwrap();
        match s.params() {
            ScalerParams::RobustMedianIqr { median, iqr } => {
                assert_eq!(median[0], 2.5);
                assert!((iqr[0] - 1.5).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn max_abs_on_philly_fed_business_conditions() {
        let ds = reference_dataset::<f64>();
        let j = ds.column_index("USAPFBC").unwrap();
        let m = ds.feature_matrix().unwrap();
        let s = fit_scaler(ScalerKind::MaxAbsUnit, m.view()).unwrap();
        match s.params() {
            ScalerParams::MaxAbsUnit { max_abs } => assert_eq!(max_abs[j], 69.0),
            _ => unreachable!(),
        }
        assert_eq!(s.apply_value(j, 34.5), 0.5);
    }

    #[test]
    fn degenerate_constant_column() {
        let m = array![[3.0f64], [3.0], [3.0]];
        for kind in ScalerKind::ALL {
            let s = fit_scaler(kind, m.view()).unwrap();
            let out = s.apply(m.view()).unwrap();
            let expect = match kind {
                ScalerKind::MaxAbsUnit => 1.0,
                ScalerKind::QuantileUniform => 0.5,
                _ => 0.0,
            };
            assert!(out.iter().all(|&v| v == expect), "{kind}: {out:?}");
        }
        let z = fit_scaler(ScalerKind::ZScore, m.view()).unwrap();
        assert_eq!(z.params(), &ScalerParams::ZScore { mean: vec![3.0], stddev: vec![1.0] });
        let zeros = array![[0.0f64], [0.0]];
        let s = fit_scaler(ScalerKind::MaxAbsUnit, zeros.view()).unwrap();
        assert_eq!(s.params(), &ScalerParams::MaxAbsUnit { max_abs: vec![1.0] });
    }

    #[test]
    fn quantile_on_own_training_column() {
        let m = array![[1.0f64], [2.0], [3.0], [4.0]];
        let s = fit_scaler(ScalerKind::QuantileUniform, m.view()).unwrap();
        let out = s.apply(m.view()).unwrap();
        for (g, w) in out.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((g - w).abs() < 1e-15);
        }
        assert_eq!(s.invert_value(0, 0.0), 1.0);
        assert_eq!(s.invert_value(0, 1.0), 4.0);
    }

    #[test]
    fn errors() {
        let one = array![[1.0f64, 2.0]];
        assert!(fit_scaler(ScalerKind::ZScore, one.view()).is_err());
        let m = array![[1.0f64, 2.0], [3.0, 5.0]];
        let s = fit_scaler(ScalerKind::ZScore, m.view()).unwrap();
        assert!(matches!(s.apply(array![[1.0]].view()), Err(Error::Dimension { expected: 2, actual: 1 })));
        assert!(s.invert(array![[1.0, 2.0, 3.0]].view()).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for k in ScalerKind::ALL {
            assert_eq!(ScalerKind::from_label(k.label()), Some(k));
        }
    }

    #[test]
    fn audit_text_lists_every_column() {
        let ds = reference_dataset::<f64>();
        let m = ds.feature_matrix().unwrap();
        for kind in ScalerKind::ALL {
            let s = fit_scaler(kind, m.view()).unwrap();
            assert_eq!(s.audit_text(ds.feature_names()).lines().count(), 31);
        }
    }
}
