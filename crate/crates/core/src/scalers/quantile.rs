use crate::scalar::{cmp_scalar, Scalar};

pub(crate) fn sorted<T: Scalar>(values: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = values.into_iter().collect();
    v.sort_by(cmp_scalar);
    v
}

/// Quantile `q` of sorted data with linear interpolation at position `q (n - 1)`.
pub fn quantile_linear<T: Scalar>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    debug_assert!(n > 0);
    let pos = q * T::from_count(n - 1);
    let lo = pos.floor().to_usize().unwrap_or(0).min(n - 1);
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - T::from_count(lo);
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Empirical CDF at `x` with plotting positions `rank / (n - 1)`.
///
/// Linear between reference points, clamped to `[0, 1]` outside them. A value
/// equal to a run of tied references maps to the midpoint of the run's positions.
pub fn empirical_cdf<T: Scalar>(sorted: &[T], x: T) -> T {
    let n = sorted.len();
    if n < 2 {
        return T::lit(0.5);
    }
    let denom = T::from_count(n - 1);
    let below = sorted.partition_point(|&r| r < x);
    let through = sorted.partition_point(|&r| r <= x);
    if through > below {
        return T::from_count(below + through - 1) / (T::lit(2.0) * denom);
    }
    if below == 0 {
        return T::zero();
    }
    if below == n {
        return T::one();
    }
    let (a, b) = (sorted[below - 1], sorted[below]);
    (T::from_count(below - 1) + (x - a) / (b - a)) / denom
}

/// Inverse of [`empirical_cdf`]: interpolates into the reference values.
pub fn inverse_cdf<T: Scalar>(sorted: &[T], p: T) -> T {
    let p = p.max(T::zero()).min(T::one());
    quantile_linear(sorted, p)
}
