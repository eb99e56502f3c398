use std::cmp::Ordering;

use super::{DecisionTree, Forest, GbtModel, ObliviousGbtModel};
use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

/// A fitted model that records the gain realized by each split.
pub trait GainSource<T: Scalar> {
    fn n_features(&self) -> usize;
    /// Total realized gain per feature index.
    fn feature_gains(&self) -> Vec<T>;
}

fn accumulate<T: Scalar>(gains: &mut [T], tree: &DecisionTree<T>) {
    for (f, g) in tree.split_gains() {
        gains[f] += g;
    }
}

impl<T: Scalar> GainSource<T> for Forest<T> {
    fn n_features(&self) -> usize {
        Forest::n_features(self)
    }

    fn feature_gains(&self) -> Vec<T> {
        let mut g = vec![T::zero(); self.n_features()];
        self.trees().iter().for_each(|t| accumulate(&mut g, t));
        g
    }
}

impl<T: Scalar> GainSource<T> for GbtModel<T> {
    fn n_features(&self) -> usize {
        GbtModel::n_features(self)
    }

    fn feature_gains(&self) -> Vec<T> {
        let mut g = vec![T::zero(); self.n_features()];
        self.trees.iter().for_each(|t| accumulate(&mut g, t));
        g
    }
}

impl<T: Scalar> GainSource<T> for ObliviousGbtModel<T> {
    fn n_features(&self) -> usize {
        ObliviousGbtModel::n_features(self)
    }

    fn feature_gains(&self) -> Vec<T> {
        let mut g = vec![T::zero(); self.n_features()];
        for level in self.trees.iter().flat_map(|t| &t.levels) {
            g[level.feature] += level.gain;
        }
        g
    }
}

/// Features ordered by descending share of total split gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking<T> {
    entries: Vec<(String, T)>,
}

impl<T: Scalar> ImportanceRanking<T> {
    pub fn entries(&self) -> &[(String, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn share_of(&self, code: &str) -> Option<T> {
        self.entries.iter().find(|(c, _)| c == code).map(|(_, s)| *s)
    }

    pub fn top(&self, k: usize) -> Vec<String> {
        self.entries.iter().take(k).map(|(c, _)| c.clone()).collect()
    }
}

/// Normalized gain shares. Zero total gain yields all-zero shares in code order.
pub fn gain_importance<T: Scalar, M: GainSource<T>>(model: &M, names: &[String]) -> Result<ImportanceRanking<T>> {
    if names.len() != model.n_features() {
        return Err(Error::dim(model.n_features(), names.len()));
    }
    let gains = model.feature_gains();
    let total: T = gains.iter().copied().sum();
    let mut entries: Vec<(String, T)> = names
        .iter()
        .zip(&gains)
        .map(|(n, &g)| (n.clone(), if total > T::zero() { g.max(T::zero()) / total } else { T::zero() }))
        .collect();
    entries.sort_by(|a, b| match cmp_scalar(&b.1, &a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    Ok(ImportanceRanking { entries })
}
