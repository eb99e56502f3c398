use ndarray::ArrayView2;
use rand::Rng as _;

use super::cart::{check_inputs, grow, validate_candidates, CandidateFeatures, CartParams};
use super::DecisionTree;
use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// `None` means `ceil(n_features / 3)`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_depth: 8,
            min_samples_leaf: 2,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::config("forest n_trees, max_depth and min_samples_leaf must be >= 1"));
        }
        Ok(())
    }

    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split.unwrap_or(n_features.div_ceil(3)).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<T> {
    trees: Vec<DecisionTree<T>>,
    n_features: usize,
}

impl<T: Scalar> Forest<T> {
    pub fn trees(&self) -> &[DecisionTree<T>] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

impl<T: Scalar> Regressor<T> for Forest<T> {
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        if x.ncols() != self.n_features {
            return Err(Error::dim(self.n_features, x.ncols()));
        }
        let k = T::from_count(self.trees.len());
        Ok(x.rows()
            .into_iter()
            .map(|r| self.trees.iter().map(|t| t.predict_row(r)).sum::<T>() / k)
            .collect())
    }
}

/// Bagged CART ensemble. Tree `t` draws from its own stream seeded by `(seed, t)`.
pub fn fit_random_forest<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    cfg: &ForestConfig,
) -> Result<Forest<T>> {
    cfg.validate()?;
    check_inputs(x, y)?;
    let p = x.ncols();
    let k = cfg.resolved_features_per_split(p);
    let candidates = if k >= p { CandidateFeatures::All } else { CandidateFeatures::Random(k) };
    validate_candidates(candidates, p)?;
    let params = CartParams { max_depth: cfg.max_depth, min_samples_leaf: cfg.min_samples_leaf, candidates };
    let n = x.nrows();
    let trees = (0..cfg.n_trees)
        .map(|t| {
            let mut rng = seed::rng_from(seed::derive(cfg.seed, "forest-tree", &[t as u64]));
            let samples: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(x, y, samples, &params, &mut rng)
        })
        .collect();
    Ok(Forest { trees, n_features: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::fit_cart;
    use ndarray::Array2;

    fn data() -> (Array2<f64>, Vec<f64>) {
        let mut rng = seed::rng_from(8);
        let x = Array2::from_shape_fn((30, 4), |_| rng.random::<f64>());
        let y = x.rows().into_iter().map(|r| (r[0] * 3.0).sin() + r[2]).collect();
        (x, y)
    }

    #[test]
    fn single_unbagged_tree_equals_cart() {
        let (x, y) = data();
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(4),
            max_depth: 5,
            min_samples_leaf: 1,
            seed: 3,
        };
        let f = fit_random_forest(x.view(), &y, &cfg).unwrap();
        let t = fit_cart(x.view(), &y, 5, 1, CandidateFeatures::All, &mut seed::rng_from(0)).unwrap();
        let want: Vec<f64> = x.rows().into_iter().map(|r| t.predict_row(r)).collect();
        assert_eq!(f.predict(x.view()).unwrap(), want);
    }

    #[test]
    fn deterministic_per_seed() {
        let (x, y) = data();
        let cfg = ForestConfig { n_trees: 20, seed: 9, ..ForestConfig::default() };
        assert_eq!(fit_random_forest(x.view(), &y, &cfg).unwrap(), fit_random_forest(x.view(), &y, &cfg).unwrap());
        let other = ForestConfig { seed: 10, ..cfg.clone() };
        assert_ne!(fit_random_forest(x.view(), &y, &cfg).unwrap(), fit_random_forest(x.view(), &y, &other).unwrap());
    }

    #[test]
    fn pure_target_predicts_constant() {
        let (x, _) = data();
        let f = fit_random_forest(x.view(), &[4.5; 30], &ForestConfig { n_trees: 10, ..Default::default() }).unwrap();
        assert!(f.predict(x.view()).unwrap().iter().all(|&p| p == 4.5));
    }

    #[test]
    fn features_per_split_default_and_bounds() {
        assert_eq!(ForestConfig::default().resolved_features_per_split(20), 7);
        assert_eq!(ForestConfig::default().resolved_features_per_split(30), 10);
        let (x, y) = data();
        let bad = ForestConfig { features_per_split: Some(9), ..Default::default() };
        assert!(fit_random_forest(x.view(), &y, &bad).is_ok());
        let zero = ForestConfig { n_trees: 0, ..Default::default() };
        assert!(fit_random_forest(x.view(), &y, &zero).is_err());
    }
}
