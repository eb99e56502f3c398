//! Regression trees and tree ensembles.
//!
//! * [`fit_cart`] grows a variance-reduction tree.
//! * [`fit_random_forest`] bags CART trees with per-split feature sampling.
//! * [`fit_second_order_gbt`] boosts depth-wise trees scored by gradient and
//!   hessian sums.
//! * [`fit_oblivious_gbt`] boosts symmetric trees that share one test per level.
//!
//! Thresholds sit at midpoints between adjacent distinct training values and a
//! sample goes left when `x[feature] <= threshold`. Equal gains resolve to the
//! lowest feature index, then the lowest threshold.

mod boost;
mod cart;
mod forest;
mod importance;
mod oblivious;
mod split;

use std::fmt::Write as _;

use ndarray::ArrayView1;

pub use boost::{fit_second_order_gbt, BoostConfig, GbtModel};
pub use cart::{fit_cart, CandidateFeatures};
pub use forest::{fit_random_forest, Forest, ForestConfig};
pub use importance::{gain_importance, GainSource, ImportanceRanking};
pub use oblivious::{fit_oblivious_gbt, Level, ObliviousGbtModel, ObliviousTree};
pub use split::{goes_left, split_score, TIE_BAND};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        /// Values up to `threshold + band` go left; see [`TIE_BAND`].
        band: T,
        gain: T,
        left: usize,
        right: usize,
    },
    Leaf { value: T },
}

/// Binary tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn leaf(value: T) -> Self {
        Self { nodes: vec![Node::Leaf { value }] }
    }

    pub(crate) fn from_nodes(nodes: Vec<Node<T>>) -> Self {
        debug_assert!(!nodes.is_empty());
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> T {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, band, left, right, .. } => {
                    i = if split::goes_left(row[*feature], *threshold, *band) { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = T> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            Node::Split { .. } => None,
        })
    }

    pub(crate) fn split_gains(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, gain, .. } => Some((*feature, *gain)),
            Node::Leaf { .. } => None,
        })
    }

    /// One line per node, for audit dumps.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = match n {
                Node::Split { feature, threshold, band, gain, left, right } => writeln!(
                    out,
                    "{i} split feature={feature} threshold={threshold:e} band={band:e} gain={gain:e} left={left} right={right}"
                ),
                Node::Leaf { value } => writeln!(out, "{i} leaf value={value:e}"),
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_leaf_predicts_constant() {
        let t = DecisionTree::leaf(7.0f64);
        assert_eq!(t.predict_row(array![1.0, -3.0].view()), 7.0);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.dump(), "0 leaf value=7e0\n");
    }
}
