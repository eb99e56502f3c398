use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Chronological train/test partition by fraction of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8 }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::config(format!("train fraction {train_fraction} outside (0, 1)")));
        }
        Ok(Self { train_fraction })
    }

    /// Number of training rows: `floor(n_rows * train_fraction)`.
    pub fn boundary_index(&self, n_rows: usize) -> Result<usize> {
        let b = (n_rows as f64 * self.train_fraction).floor() as usize;
        if b < 1 || b + 1 > n_rows {
            return Err(Error::config(format!(
                "split boundary {b} outside [1, {}] for {n_rows} rows",
                n_rows.saturating_sub(1)
            )));
        }
        Ok(b)
    }
}

/// First `boundary_index` rows train, the rest test. No shuffling.
pub fn chronological_split<T: Scalar>(
    ds: &Dataset<T>,
    spec: &SplitSpec,
) -> Result<(Dataset<T>, Dataset<T>)> {
    ds.require_target()?;
    if ds.missing_count() > 0 {
        return Err(Error::config("split requires an imputed dataset"));
    }
    let b = spec.boundary_index(ds.n_rows())?;
    Ok((ds.slice_rows(0, b), ds.slice_rows(b, ds.n_rows())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::reference_dataset;

    fn with_target(n: usize) -> Dataset<f64> {
        let ds = reference_dataset::<f64>().slice_rows(0, n);
        ds.with_target(vec![4.0; n]).unwrap()
    }

    #[test]
    fn eighty_percent_of_48() {
        let ds = with_target(48);
        let (train, test) = chronological_split(&ds, &SplitSpec::default()).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (38, 10));
        assert!(train.dates().last() < test.dates().first());
        assert_eq!(train.concat(&test).unwrap(), ds);
    }

    #[test]
    fn minimal_two_rows() {
        let ds = with_target(2);
        let (train, test) = chronological_split(&ds, &SplitSpec::new(0.5).unwrap()).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (1, 1));
    }

    #[test]
    fn boundary_out_of_range() {
        let ds = with_target(2);
        assert!(chronological_split(&ds, &SplitSpec::new(0.2).unwrap()).is_err());
        assert!(SplitSpec::new(1.0).is_err());
        let no_target = reference_dataset::<f64>();
        assert!(chronological_split(&no_target, &SplitSpec::default()).is_err());
    }
}
