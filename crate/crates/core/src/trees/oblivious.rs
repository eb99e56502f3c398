use ndarray::{ArrayView1, ArrayView2};

use super::boost::{leaf_weight, mean_squared, BoostConfig};
use super::cart::check_inputs;
use super::split::{goes_left, midpoint, sort_by_feature, split_score, tie_band, Candidate};
use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level<T> {
    pub feature: usize,
    pub threshold: T,
    pub band: T,
    /// Gain summed over every leaf the level splits.
    pub gain: T,
}

/// Symmetric tree: the same `(feature, threshold)` test at every node of a level.
///
/// Leaf index is built most-significant-bit first: level 0 decides the top bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ObliviousTree<T> {
    pub levels: Vec<Level<T>>,
    pub leaves: Vec<T>,
}

impl<T: Scalar> ObliviousTree<T> {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn leaf_index(&self, row: ArrayView1<'_, T>) -> usize {
        self.levels
            .iter()
            .fold(0, |idx, l| (idx << 1) | usize::from(!goes_left(row[l.feature], l.threshold, l.band)))
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> T {
        self.leaves[self.leaf_index(row)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObliviousGbtModel<T> {
    pub base_score: T,
    pub learning_rate: T,
    pub trees: Vec<ObliviousTree<T>>,
    pub loss_trace: Vec<T>,
    n_features: usize,
}

impl<T: Scalar> ObliviousGbtModel<T> {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> T {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.learning_rate * t.predict_row(row))
    }
}

impl<T: Scalar> Regressor<T> for ObliviousGbtModel<T> {
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        if x.ncols() != self.n_features {
            return Err(Error::dim(self.n_features, x.ncols()));
        }
        Ok(x.rows().into_iter().map(|r| self.predict_row(r)).collect())
    }
}

/// Same objective as the depth-wise booster, but every tree is oblivious.
pub fn fit_oblivious_gbt<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    cfg: &BoostConfig,
) -> Result<ObliviousGbtModel<T>> {
    cfg.validate()?;
    check_inputs(x, y)?;
    let n = y.len();
    let base = y.iter().copied().sum::<T>() / T::from_count(n);
    let lr = T::lit(cfg.learning_rate);
    let lambda = T::lit(cfg.l2_leaf);
    let min_gain = T::lit(cfg.min_split_gain);
    let orders: Vec<Vec<usize>> = (0..x.ncols())
        .map(|f| {
            let mut s: Vec<usize> = (0..n).collect();
            sort_by_feature(x, &mut s, f);
            s
        })
        .collect();
    let hess = vec![T::one(); n];
    let mut pred = vec![base; n];
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut loss_trace = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let grad: Vec<T> = pred.iter().zip(y).map(|(&p, &t)| p - t).collect();
        let tree = grow_oblivious(x, &orders, &grad, &hess, cfg.max_depth, lambda, min_gain);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += lr * tree.predict_row(x.row(i));
        }
        loss_trace.push(mean_squared(&pred, y));
        trees.push(tree);
    }
    Ok(ObliviousGbtModel { base_score: base, learning_rate: lr, trees, loss_trace, n_features: x.ncols() })
}

fn leaf_totals<T: Scalar>(leaf_of: &[usize], n_leaves: usize, grad: &[T], hess: &[T]) -> (Vec<T>, Vec<T>) {
    let mut g = vec![T::zero(); n_leaves];
    let mut h = vec![T::zero(); n_leaves];
    for (i, &l) in leaf_of.iter().enumerate() {
        g[l] += grad[i];
        h[l] += hess[i];
    }
    (g, h)
}

/// Best `(feature, threshold)` for the next level given the current leaf assignment.
pub(crate) fn best_level<T: Scalar>(
    x: ArrayView2<'_, T>,
    orders: &[Vec<usize>],
    leaf_of: &[usize],
    n_leaves: usize,
    grad: &[T],
    hess: &[T],
    lambda: T,
) -> Option<Candidate<T>> {
    let (g_tot, h_tot) = leaf_totals(leaf_of, n_leaves, grad, hess);
    let half = T::lit(0.5);
    let mut best: Option<Candidate<T>> = None;
    let mut gl = vec![T::zero(); n_leaves];
    let mut hl = vec![T::zero(); n_leaves];
    for (f, order) in orders.iter().enumerate() {
        gl.iter_mut().for_each(|v| *v = T::zero());
        hl.iter_mut().for_each(|v| *v = T::zero());
        for k in 0..order.len().saturating_sub(1) {
            let i = order[k];
            gl[leaf_of[i]] += grad[i];
            hl[leaf_of[i]] += hess[i];
            let lo = x[[i, f]];
            let hi = x[[order[k + 1], f]];
            if !(lo < hi) {
                continue;
            }
            let gain = (0..n_leaves).fold(T::zero(), |acc, l| {
                acc + split_score(gl[l], hl[l], g_tot[l], h_tot[l], lambda, half)
            });
            let cand = Candidate { feature: f, threshold: midpoint(lo, hi), band: tie_band(lo, hi), gain };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
    }
    best
}

fn grow_oblivious<T: Scalar>(
    x: ArrayView2<'_, T>,
    orders: &[Vec<usize>],
    grad: &[T],
    hess: &[T],
    max_depth: usize,
    lambda: T,
    min_gain: T,
) -> ObliviousTree<T> {
    let n = grad.len();
    let mut leaf_of = vec![0usize; n];
    let mut levels = Vec::new();
    while levels.len() < max_depth {
        let n_leaves = 1 << levels.len();
        let Some(best) = best_level(x, orders, &leaf_of, n_leaves, grad, hess, lambda) else { break };
        if !(best.gain > min_gain) {
            break;
        }
        for (i, l) in leaf_of.iter_mut().enumerate() {
            *l = (*l << 1) | usize::from(x[[i, best.feature]] > best.threshold);
        }
        levels.push(Level { feature: best.feature, threshold: best.threshold, band: best.band, gain: best.gain });
    }
    let n_leaves = 1 << levels.len();
    let (g, h) = leaf_totals(&leaf_of, n_leaves, grad, hess);
    let leaves = g.iter().zip(&h).map(|(&g, &h)| leaf_weight(g, h, lambda)).collect();
    ObliviousTree { levels, leaves }
}
