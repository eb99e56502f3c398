use ndarray::ArrayView2;
use rand::seq::index;

use super::split::{best_on_feature, sort_by_feature, Candidate};
use super::{DecisionTree, Node};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::Rng;

/// Which features a split may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateFeatures {
    All,
    /// Draw this many distinct features afresh at every split.
    Random(usize),
}

pub(crate) struct CartParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub candidates: CandidateFeatures,
}

/// Greedy variance-reduction regression tree on all rows of `x`.
///
/// `max_depth = 0` yields a single leaf at `mean(y)`.
pub fn fit_cart<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    max_depth: usize,
    min_samples_leaf: usize,
    candidates: CandidateFeatures,
    rng: &mut Rng,
) -> Result<DecisionTree<T>> {
    check_inputs(x, y)?;
    let params = CartParams { max_depth, min_samples_leaf: min_samples_leaf.max(1), candidates };
    validate_candidates(candidates, x.ncols())?;
    Ok(grow(x, y, (0..x.nrows()).collect(), &params, rng))
}

pub(crate) fn check_inputs<T: Scalar>(x: ArrayView2<'_, T>, y: &[T]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty("sample set"));
    }
    if x.nrows() != y.len() {
        return Err(Error::dim(x.nrows(), y.len()));
    }
    if x.ncols() == 0 {
        return Err(Error::Empty("feature set"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::config("tree training data must be finite"));
    }
    Ok(())
}

pub(crate) fn validate_candidates(c: CandidateFeatures, n_features: usize) -> Result<()> {
    match c {
        CandidateFeatures::Random(k) if k == 0 || k > n_features => Err(Error::config(format!(
            "features_per_split {k} outside [1, {n_features}]"
        ))),
        _ => Ok(()),
    }
}

/// Grows a tree on `samples` (which may repeat rows, as after bootstrapping).
pub(crate) fn grow<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    samples: Vec<usize>,
    params: &CartParams,
    rng: &mut Rng,
) -> DecisionTree<T> {
    let mut nodes = Vec::new();
    grow_node(x, y, samples, 0, params, rng, &mut nodes);
    DecisionTree::from_nodes(nodes)
}

fn grow_node<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[T],
    mut samples: Vec<usize>,
    depth: usize,
    params: &CartParams,
    rng: &mut Rng,
    nodes: &mut Vec<Node<T>>,
) -> usize {
    let id = nodes.len();
    let n = samples.len();
    let mean = samples.iter().map(|&i| y[i]).sum::<T>() / T::from_count(n);
    nodes.push(Node::Leaf { value: mean });

    let pure = samples.iter().all(|&i| y[i] == y[samples[0]]);
    if depth >= params.max_depth || n < 2 * params.min_samples_leaf || pure {
        return id;
    }

    let features: Vec<usize> = match params.candidates {
        CandidateFeatures::All => (0..x.ncols()).collect(),
        CandidateFeatures::Random(k) if k >= x.ncols() => (0..x.ncols()).collect(),
        CandidateFeatures::Random(k) => {
            let mut f = index::sample(rng, x.ncols(), k).into_vec();
            f.sort_unstable();
            f
        }
    };

    let stat = |i: usize| (y[i] - mean, T::one());
    let totals = samples.iter().fold((T::zero(), T::zero()), |(g, h), &i| {
        let (gi, hi) = stat(i);
        (g + gi, h + hi)
    });
    let sse = samples.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum::<T>();

    let mut best: Option<Candidate<T>> = None;
    for &f in &features {
        sort_by_feature(x, &mut samples, f);
        if let Some(c) =
            best_on_feature(x, &samples, f, stat, totals, params.min_samples_leaf, T::zero(), T::one())
        {
            if c.beats(&best) {
                best = Some(c);
            }
        }
    }
    let Some(best) = best else { return id };
    if !(best.gain > sse * T::epsilon() * T::from_count(n)) {
        return id;
    }

    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&i| x[[i, best.feature]] <= best.threshold);
    let left_id = grow_node(x, y, left, depth + 1, params, rng, nodes);
    let right_id = grow_node(x, y, right, depth + 1, params, rng, nodes);
    nodes[id] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        band: best.band,
        gain: best.gain,
        left: left_id,
        right: right_id,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use ndarray::{array, Array2};
    use rand::Rng as _;

    /// Exhaustive oracle: best single split by direct SSE evaluation.
    fn brute_force_stump(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let sse = |v: &[f64]| {
            if v.is_empty() {
                return 0.0;
            }
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>()
        };
        let mut sorted: Vec<f64> = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for w in sorted.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<_>, Vec<_>) = xs.iter().zip(ys).partition(|(x, _)| **x <= t);
            let l: Vec<f64> = l.into_iter().map(|p| *p.1).collect();
            let r: Vec<f64> = r.into_iter().map(|p| *p.1).collect();
            let gain = sse(ys) - sse(&l) - sse(&r);
            if gain > best.1 + 1e-12 {
                best = (t, gain);
            }
        }
        best
    }

    #[test]
    fn stump_on_two_clusters() {
        let x = array![[1.0f64], [2.0], [9.0], [10.0]];
        let y = [0.0, 0.0, 1.0, 1.0];
        let t = fit_cart(x.view(), &y, 1, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        let (oracle_t, oracle_gain) = brute_force_stump(&[1.0, 2.0, 9.0, 10.0], &y);
        match t.nodes()[0] {
            Node::Split { threshold, gain, .. } => {
                assert_eq!(threshold, 5.5);
                assert_eq!(threshold, oracle_t);
                assert!((gain - oracle_gain).abs() < 1e-12);
            }
            _ => panic!("expected split"),
        }
        let mut leaves: Vec<f64> = t.leaf_values().collect();
        leaves.sort_by(f64::total_cmp);
        assert_eq!(leaves, vec![0.0, 1.0]);
        assert_eq!(t.predict_row(array![1.5].view()), 0.0);
        assert_eq!(t.predict_row(array![5.5].view()), 0.0);
        assert_eq!(t.predict_row(array![5.6].view()), 1.0);
    }

    #[test]
    fn random_stumps_match_exhaustive_oracle() {
        let mut rng = rng_from(21);
        for _ in 0..20 {
            let xs: Vec<f64> = (0..15).map(|_| (rng.random::<f64>() * 20.0).round()).collect();
            let ys: Vec<f64> = (0..15).map(|_| rng.random::<f64>()).collect();
            let x = Array2::from_shape_vec((15, 1), xs.clone()).unwrap();
            let t = fit_cart(x.view(), &ys, 1, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
            let (ot, og) = brute_force_stump(&xs, &ys);
            if let Node::Split { threshold, gain, .. } = t.nodes()[0] {
                assert!((gain - og).abs() < 1e-9);
                assert_eq!(threshold, ot);
            } else {
                assert!(og <= 1e-12);
            }
        }
    }

    #[test]
    fn depth_zero_and_single_sample_give_mean_leaf() {
        let x = array![[1.0f64], [2.0], [3.0]];
        let t = fit_cart(x.view(), &[1.0, 2.0, 6.0], 0, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { value: 3.0 }]);
        let one = array![[4.0f64]];
        let t = fit_cart(one.view(), &[2.5], 5, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { value: 2.5 }]);
    }

    #[test]
    fn pure_target_never_splits() {
        let x = Array2::from_shape_fn((20, 3), |(i, j)| (i * (j + 1)) as f64);
        let t = fit_cart(x.view(), &[0.3; 20], 8, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        assert_eq!(t.n_splits(), 0);
    }

    #[test]
    fn ties_break_to_lowest_feature() {
        // Two identical columns: the split must use feature 0.
        let x = array![[1.0f64, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]];
        let t = fit_cart(x.view(), &[0.0, 0.0, 1.0, 1.0], 1, 1, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn min_leaf_respected() {
        let x = array![[1.0f64], [2.0], [3.0], [4.0]];
        let t = fit_cart(x.view(), &[0.0, 5.0, 5.0, 5.0], 3, 2, CandidateFeatures::All, &mut rng_from(0)).unwrap();
        assert!(matches!(t.nodes()[0], Node::Split { threshold, .. } if threshold == 2.5));
        assert_eq!(t.n_splits(), 1);
    }

    #[test]
    fn errors() {
        let x = Array2::<f64>::zeros((0, 1));
        assert!(fit_cart(x.view(), &[], 2, 1, CandidateFeatures::All, &mut rng_from(0)).is_err());
        let x = array![[1.0f64]];
        assert!(fit_cart(x.view(), &[1.0], 2, 1, CandidateFeatures::Random(2), &mut rng_from(0)).is_err());
    }
}
