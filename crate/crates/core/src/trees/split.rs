use ndarray::ArrayView2;

use crate::scalar::{cmp_scalar, Scalar};

/// `G^2 / (H + lambda)`, zero for an empty side with `lambda = 0`.
#[inline]
fn term<T: Scalar>(g: T, h: T, lambda: T) -> T {
    let d = h + lambda;
    if d > T::zero() {
        g * g / d
    } else {
        T::zero()
    }
}

/// Score improvement of splitting `(g, h)` into `(gl, hl)` and the remainder.
///
/// With `scale = 1/2` and second-order statistics this is the usual boosting
/// split gain; with `scale = 1`, `lambda = 0`, centered targets and unit
/// weights it is the reduction in sum of squares.
#[inline]
pub fn split_score<T: Scalar>(gl: T, hl: T, g: T, h: T, lambda: T, scale: T) -> T {
    scale * (term(gl, hl, lambda) + term(g - gl, h - hl, lambda) - term(g, h, lambda))
}

/// Sample indices ordered by feature value, ties by index.
pub(crate) fn sort_by_feature<T: Scalar>(x: ArrayView2<'_, T>, samples: &mut [usize], feature: usize) {
    samples.sort_by(|&a, &b| cmp_scalar(&x[[a, feature]], &x[[b, feature]]).then(a.cmp(&b)));
}

/// Midpoint threshold with `lo <= t < hi`.
#[inline]
pub(crate) fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let t = lo + (hi - lo) / T::lit(2.0);
    if t >= hi {
        lo
    } else {
        t
    }
}

/// Fraction of the gap between neighbouring values that still routes left.
///
/// A hold-out value sitting exactly on a midpoint would otherwise go either
/// way after a rescaling, depending on rounding.
pub const TIE_BAND: f64 = 1e-9;

#[inline]
pub(crate) fn tie_band<T: Scalar>(lo: T, hi: T) -> T {
    (hi - lo) * T::lit(TIE_BAND)
}

/// `x <= threshold`, counting values within `band` above it as equal.
#[inline]
pub fn goes_left<T: Scalar>(x: T, threshold: T, band: T) -> bool {
    x <= threshold || x - threshold <= band
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate<T> {
    pub feature: usize,
    pub threshold: T,
    pub band: T,
    pub gain: T,
}

impl<T: Scalar> Candidate<T> {
    /// Strictly better; equal gains keep the earlier (lower feature / threshold) candidate.
    pub fn beats(&self, other: &Option<Candidate<T>>) -> bool {
        other.as_ref().is_none_or(|o| self.gain > o.gain)
    }
}

/// Best threshold on one feature for the samples in `sorted` order.
///
/// `stat(i)` yields the per-sample `(g, h)`; each side must hold at least
/// `min_leaf` samples.
pub(crate) fn best_on_feature<T: Scalar>(
    x: ArrayView2<'_, T>,
    sorted: &[usize],
    feature: usize,
    stat: impl Fn(usize) -> (T, T),
    totals: (T, T),
    min_leaf: usize,
    lambda: T,
    scale: T,
) -> Option<Candidate<T>> {
    let n = sorted.len();
    let (g, h) = totals;
    let mut gl = T::zero();
    let mut hl = T::zero();
    let mut best: Option<Candidate<T>> = None;
    for k in 0..n.saturating_sub(1) {
        let (gi, hi) = stat(sorted[k]);
        gl += gi;
        hl += hi;
        let left_n = k + 1;
        if left_n < min_leaf || n - left_n < min_leaf {
            continue;
        }
        let lo = x[[sorted[k], feature]];
        let hi_v = x[[sorted[k + 1], feature]];
        if !(lo < hi_v) {
            continue;
        }
        let cand = Candidate {
            feature,
            threshold: midpoint(lo, hi_v),
            band: tie_band(lo, hi_v),
            gain: split_score(gl, hl, g, h, lambda, scale),
        };
        if cand.beats(&best) {
            best = Some(cand);
        }
    }
    best
}
