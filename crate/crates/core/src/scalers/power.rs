//! Yeo-Johnson power transform and its maximum-likelihood lambda.

use crate::scalar::Scalar;

pub const LAMBDA_MIN: f64 = -5.0;
pub const LAMBDA_MAX: f64 = 5.0;
const LAMBDA_TOL: f64 = 1e-6;
const COARSE_STEP: f64 = 0.25;

/// Yeo-Johnson transform of `x` at `lambda`.
pub fn yeo_johnson<T: Scalar>(x: T, lambda: T) -> T {
    let two = T::lit(2.0);
    if x >= T::zero() {
        if lambda == T::zero() {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else {
        let p = two - lambda;
        if p == T::zero() {
            -(-x).ln_1p()
        } else {
            -((p * (-x).ln_1p()).exp_m1() / p)
        }
    }
}

/// Inverse of [`yeo_johnson`]; NaN outside the transform's range.
pub fn yeo_johnson_inverse<T: Scalar>(y: T, lambda: T) -> T {
    let two = T::lit(2.0);
    if y >= T::zero() {
        if lambda == T::zero() {
            y.exp_m1()
        } else {
            ((lambda * y).ln_1p() / lambda).exp_m1()
        }
    } else {
        let p = two - lambda;
        if p == T::zero() {
            -(-y).exp_m1()
        } else {
            -(((-p * y).ln_1p()) / p).exp_m1()
        }
    }
}

/// Constant added by [`yeo_johnson_shifted`]: `1/lambda` for `lambda < 0`,
/// `-1/(2 - lambda)` for `lambda > 2`, else `0`.
pub fn shift_offset<T: Scalar>(lambda: T) -> T {
    let two = T::lit(2.0);
    if lambda < T::zero() {
        lambda.recip()
    } else if lambda > two {
        -(two - lambda).recip()
    } else {
        T::zero()
    }
}

/// `yeo_johnson(x, lambda) + shift_offset(lambda)`, evaluated without cancellation.
///
/// For `lambda < 0` the plain transform of large positive `x` approaches `-1/lambda`
/// and keeps few significant digits; the shifted form decays to zero instead and
/// stays exactly invertible. `lambda > 2` mirrors this on the negative branch.
/// Standardizing either form gives the same values.
pub fn yeo_johnson_shifted<T: Scalar>(x: T, lambda: T) -> T {
    let two = T::lit(2.0);
    if x >= T::zero() && lambda < T::zero() {
        (lambda * x.ln_1p()).exp() / lambda
    } else if x < T::zero() && lambda > two {
        let p = two - lambda;
        -(p * (-x).ln_1p()).exp() / p
    } else {
        yeo_johnson(x, lambda) + shift_offset(lambda)
    }
}

/// Inverse of [`yeo_johnson_shifted`].
pub fn yeo_johnson_shifted_inverse<T: Scalar>(z: T, lambda: T) -> T {
    let two = T::lit(2.0);
    let off = shift_offset(lambda);
    if z >= off && lambda < T::zero() {
        ((lambda * z).ln() / lambda).exp_m1()
    } else if z < off && lambda > two {
        let p = two - lambda;
        -((-p * z).ln() / p).exp_m1()
    } else {
        yeo_johnson_inverse(z - off, lambda)
    }
}

/// Profile log-likelihood of a Gaussian fit to the transformed column.
///
/// `-n/2 ln(var) + (lambda - 1) sum(sign(x) ln(1 + |x|))`, with the population
/// variance of the transformed values (computed on the shifted form). Returns `-inf` when the variance is
/// zero or not finite.
pub fn log_likelihood<T: Scalar>(column: &[T], lambda: T) -> T {
    let n = T::from_count(column.len());
    let transformed: Vec<T> = column.iter().map(|&x| yeo_johnson_shifted(x, lambda)).collect();
    let mean = transformed.iter().copied().sum::<T>() / n;
    let var = transformed.iter().map(|&t| (t - mean) * (t - mean)).sum::<T>() / n;
    if !(var > T::zero()) || !var.is_finite() {
        return T::neg_infinity();
    }
    let jacobian: T = column.iter().map(|&x| x.signum() * x.abs().ln_1p()).sum();
    -n / T::lit(2.0) * var.ln() + (lambda - T::one()) * jacobian
}

fn is_constant<T: Scalar>(column: &[T]) -> bool {
    column.windows(2).all(|w| w[0] == w[1])
}

/// Lambda maximizing [`log_likelihood`] over `[-5, 5]`.
///
/// A coarse scan brackets the best region, then golden-section search refines
/// it to `1e-6`. A constant (or too-short) column returns `1`.
pub fn fit_lambda<T: Scalar>(column: &[T]) -> T {
    if column.len() < 2 || is_constant(column) {
        return T::one();
    }
    let ll = |l: f64| log_likelihood(column, T::lit(l)).as_f64();
    let steps = ((LAMBDA_MAX - LAMBDA_MIN) / COARSE_STEP).round() as usize;
    let mut best = (LAMBDA_MIN, ll(LAMBDA_MIN));
    for k in 1..=steps {
        let l = LAMBDA_MIN + k as f64 * COARSE_STEP;
        let v = ll(l);
        if v > best.1 {
            best = (l, v);
        }
    }
    let lo = (best.0 - COARSE_STEP).max(LAMBDA_MIN);
    let hi = (best.0 + COARSE_STEP).min(LAMBDA_MAX);
    let refined = golden_section_max(ll, lo, hi, LAMBDA_TOL);
    let v = ll(refined);
    T::lit(if v >= best.1 { refined } else { best.0 })
}

/// Maximizes a unimodal function on `[a, b]`.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (c, fc), (d, fd)]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
        .0
}
