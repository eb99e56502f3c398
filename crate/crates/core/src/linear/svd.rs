//! One-sided Jacobi SVD and minimum-norm least squares.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// `a = w * v^T` with `w` having mutually orthogonal columns.
///
/// Column norms of `w` are the singular values.
struct Orthogonalized<T> {
    w: Array2<T>,
    v: Array2<T>,
}

fn hestenes<T: Scalar>(a: ArrayView2<'_, T>) -> Orthogonalized<T> {
    let n = a.ncols();
    let mut w = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (wp, wq) = (w.column(p), w.column(q));
                let alpha = wp.dot(&wp);
                let beta = wq.dot(&wq);
                let gamma = wp.dot(&wq);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    Orthogonalized { w, v }
}

fn rotate<T: Scalar>(m: &mut Array2<T>, p: usize, q: usize, c: T, s: T) {
    for i in 0..m.nrows() {
        let (x, y) = (m[[i, p]], m[[i, q]]);
        m[[i, p]] = c * x - s * y;
        m[[i, q]] = s * x + c * y;
    }
}

/// Singular values of `a` in descending order.
pub fn singular_values<T: Scalar>(a: ArrayView2<'_, T>) -> Vec<T> {
    let o = hestenes(a);
    let mut s: Vec<T> = o.w.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    s.sort_by(|a, b| crate::scalar::cmp_scalar(b, a));
    s
}

/// Minimum-norm solution of `min ||a x - b||`.
///
/// Singular values below `max(m, n) * eps * sigma_max` are treated as zero.
pub fn lstsq_min_norm<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let (m, n) = a.dim();
    let o = hestenes(a);
    let sigma: Vec<T> = o.w.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    let smax = sigma.iter().copied().fold(T::zero(), T::max);
    let tol = T::from_count(m.max(n)) * T::epsilon() * smax;
    let mut x = Array1::<T>::zeros(n);
    for (j, &s) in sigma.iter().enumerate() {
        if s > tol && s > T::zero() {
            let coef = o.w.column(j).dot(&b) / (s * s);
            x.scaled_add(coef, &o.v.column(j));
        }
    }
    x
}
