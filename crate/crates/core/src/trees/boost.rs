use ndarray::ArrayView2;

use super::cart::check_inputs;
use super::split::{best_on_feature, sort_by_feature, Candidate};
use super::{DecisionTree, Node};
use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::scalar::Scalar;

/// Shared settings for both boosters.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub l2_leaf: f64,
    pub min_split_gain: f64,
    /// Unused by the exact greedy growers, carried for config symmetry.
    pub seed: u64,
}

impl BoostConfig {
    /// Reference settings for the depth-wise booster.
    pub fn depthwise() -> Self {
        Self { rounds: 500, learning_rate: 0.05, max_depth: 4, l2_leaf: 1.0, min_split_gain: 0.0, seed: 0 }
    }

    /// Reference settings for the oblivious booster.
    pub fn oblivious() -> Self {
        Self { max_depth: 6, ..Self::depthwise() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::config("boosting rounds must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config(format!("learning_rate {} outside (0, 1]", self.learning_rate)));
        }
        if self.max_depth == 0 {
            return Err(Error::config("boosting max_depth must be >= 1"));
        }
        if !(self.l2_leaf >= 0.0) || !(self.min_split_gain >= 0.0) {
            return Err(Error::config("l2_leaf and min_split_gain must be >= 0"));
        }
        Ok(())
    }
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self::depthwise()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel<T> {
    pub base_score: T,
    pub learning_rate: T,
    pub trees: Vec<DecisionTree<T>>,
    /// Training mean squared error after each round.
    pub loss_trace: Vec<T>,
    n_features: usize,
}

impl<T: Scalar> GbtModel<T> {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: ndarray::ArrayView1<'_, T>) -> T {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.learning_rate * t.predict_row(row))
    }
}

impl<T: Scalar> Regressor<T> for GbtModel<T> {
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        if x.ncols() != self.n_features {
            return Err(Error::dim(self.n_features, x.ncols()));
        }
        Ok(x.rows().into_iter().map(|r| self.predict_row(r)).collect())
    }
}

pub(crate) fn mean_squared<T: Scalar>(pred: &[T], y: &[T]) -> T {
    pred.iter().zip(y).map(|(&p, &t)| (p - t) * (p - t)).sum::<T>() / T::from_count(y.len())
}

pub(crate) struct GradStats<'a, T> {
    pub grad: &'a [T],
    pub hess: &'a [T],
    pub lambda: T,
    pub min_gain: T,
}

/// Second-order boosting with squared loss (`g = pred - y`, `h = 1`).
pub fn fit_second_order_gbt<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    cfg: &BoostConfig,
) -> Result<GbtModel<T>> {
    cfg.validate()?;
    check_inputs(x, y)?;
    let n = y.len();
    let base = y.iter().copied().sum::<T>() / T::from_count(n);
    let lr = T::lit(cfg.learning_rate);
    let lambda = T::lit(cfg.l2_leaf);
    let min_gain = T::lit(cfg.min_split_gain);
    let mut pred = vec![base; n];
    let hess = vec![T::one(); n];
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut loss_trace = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let grad: Vec<T> = pred.iter().zip(y).map(|(&p, &t)| p - t).collect();
        let stats = GradStats { grad: &grad, hess: &hess, lambda, min_gain };
        let mut nodes = Vec::new();
        grow_node(x, (0..n).collect(), 0, cfg.max_depth, &stats, &mut nodes);
        let tree = DecisionTree::from_nodes(nodes);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += lr * tree.predict_row(x.row(i));
        }
        loss_trace.push(mean_squared(&pred, y));
        trees.push(tree);
    }
    Ok(GbtModel { base_score: base, learning_rate: lr, trees, loss_trace, n_features: x.ncols() })
}

pub(crate) fn leaf_weight<T: Scalar>(g: T, h: T, lambda: T) -> T {
    let d = h + lambda;
    if d > T::zero() {
        -g / d
    } else {
        T::zero()
    }
}

fn grow_node<T: Scalar>(
    x: ArrayView2<'_, T>,
    mut samples: Vec<usize>,
    depth: usize,
    max_depth: usize,
    stats: &GradStats<'_, T>,
    nodes: &mut Vec<Node<T>>,
) -> usize {
    let id = nodes.len();
    let (g, h) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(g, h), &i| (g + stats.grad[i], h + stats.hess[i]));
    nodes.push(Node::Leaf { value: leaf_weight(g, h, stats.lambda) });
    if depth >= max_depth || samples.len() < 2 {
        return id;
    }
    let stat = |i: usize| (stats.grad[i], stats.hess[i]);
    let half = T::lit(0.5);
    let mut best: Option<Candidate<T>> = None;
    for f in 0..x.ncols() {
        sort_by_feature(x, &mut samples, f);
        if let Some(c) = best_on_feature(x, &samples, f, stat, (g, h), 1, stats.lambda, half) {
            if c.beats(&best) {
                best = Some(c);
            }
        }
    }
    let Some(best) = best.filter(|b| b.gain > stats.min_gain) else { return id };
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&i| x[[i, best.feature]] <= best.threshold);
    let l = grow_node(x, left, depth + 1, max_depth, stats, nodes);
    let r = grow_node(x, right, depth + 1, max_depth, stats, nodes);
    nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, band: best.band, gain: best.gain, left: l, right: r };
    id
}
