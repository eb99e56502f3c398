//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved directly in the signed coefficients `beta = alpha - alpha*`:
//!
//! ```text
//! maximize   -1/2 beta' K beta - eps * sum |beta_i| + y' beta
//! subject to sum beta_i = 0,  |beta_i| <= C
//! ```
//!
//! Each step moves one pair `(beta_i + t, beta_j - t)`, which keeps the
//! equality constraint, and maximizes the resulting one-dimensional concave
//! piecewise quadratic exactly.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SvrConfig {
    pub c_penalty: f64,
    pub epsilon_tube: f64,
    /// `None` resolves to `1 / n_features` at fit time.
    pub gamma: Option<f64>,
    pub kkt_tolerance: f64,
    /// Update budget is `max_passes * n_samples` pair steps.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self { c_penalty: 10.0, epsilon_tube: 0.05, gamma: None, kkt_tolerance: 1e-4, max_passes: 200, seed: 0 }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.c_penalty) {
            return Err(Error::config("svr c_penalty must be positive"));
        }
        if !(self.epsilon_tube.is_finite() && self.epsilon_tube >= 0.0) {
            return Err(Error::config("svr epsilon_tube must be non-negative"));
        }
        if self.gamma.is_some_and(|g| !positive(g)) {
            return Err(Error::config("svr gamma must be positive"));
        }
        if !positive(self.kkt_tolerance) {
            return Err(Error::config("svr kkt_tolerance must be positive"));
        }
        if self.max_passes == 0 {
            return Err(Error::config("svr max_passes must be positive"));
        }
        Ok(())
    }

    pub fn resolved_gamma(&self, n_features: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / n_features.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel<T> {
    pub support: Array2<T>,
    pub dual_coefficients: Vec<T>,
    pub bias: T,
    pub gamma: T,
    /// False when the update budget ran out before the KKT tolerance was met.
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective after each pair update, starting from `beta = 0`.
    pub objective_trace: Vec<T>,
}

impl<T: Scalar> SvrModel<T> {
    /// Model with no support vectors.
    pub fn constant(bias: T, n_features: usize, gamma: T) -> Self {
        Self {
            support: Array2::zeros((0, n_features)),
            dual_coefficients: Vec::new(),
            bias,
            gamma,
            converged: true,
            iterations: 0,
            objective_trace: vec![T::zero()],
        }
    }

    pub fn n_support(&self) -> usize {
        self.dual_coefficients.len()
    }

    pub fn decision(&self, row: &[T]) -> T {
        self.support
            .rows()
            .into_iter()
            .zip(&self.dual_coefficients)
            .fold(self.bias, |acc, (s, &b)| acc + b * rbf_unchecked(s.iter().copied(), row.iter().copied(), self.gamma))
    }
}

impl<T: Scalar> Regressor<T> for SvrModel<T> {
    fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        predict_svr(self, x)
    }
}

fn rbf_unchecked<T: Scalar>(a: impl Iterator<Item = T>, b: impl Iterator<Item = T>, gamma: T) -> T {
    let d2 = a.zip(b).fold(T::zero(), |acc, (u, v)| acc + (u - v) * (u - v));
    (-gamma * d2).exp()
}

pub fn rbf_kernel<T: Scalar>(a: &[T], b: &[T], gamma: T) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::dim(a.len(), b.len()));
    }
    Ok(rbf_unchecked(a.iter().copied(), b.iter().copied(), gamma))
}

/// Full Gram matrix of the rows of `x`.
pub fn kernel_matrix<T: Scalar>(x: ArrayView2<'_, T>, gamma: T) -> Array2<T> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = T::one();
        for j in 0..i {
            let v = rbf_unchecked(x.row(i).iter().copied(), x.row(j).iter().copied(), gamma);
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Dual objective at `beta`.
pub fn dual_objective<T: Scalar>(k: &Array2<T>, y: &[T], beta: &[T], epsilon: T) -> T {
    let n = beta.len();
    let mut quad = T::zero();
    for i in 0..n {
        let row: T = (0..n).map(|j| k[[i, j]] * beta[j]).sum();
        quad += beta[i] * row;
    }
    let lin: T = beta.iter().zip(y).map(|(&b, &t)| b * t - epsilon * b.abs()).sum();
    lin - quad / T::lit(2.0)
}

struct Solver<'a, T> {
    k: &'a Array2<T>,
    c: T,
    eps: T,
    beta: Vec<T>,
    /// `y - K beta`
    grad: Vec<T>,
}

impl<T: Scalar> Solver<'_, T> {
    fn up(&self, i: usize) -> Option<T> {
        (self.beta[i] < self.c).then(|| {
            let s = if self.beta[i] >= T::zero() { T::one() } else { -T::one() };
            self.grad[i] - self.eps * s
        })
    }

    fn down(&self, j: usize) -> Option<T> {
        (self.beta[j] > -self.c).then(|| {
            let s = if self.beta[j] > T::zero() { T::one() } else { -T::one() };
            -self.grad[j] + self.eps * s
        })
    }

    /// Maximal violating pair with its directional derivative; lowest indices on ties.
    fn working_pair(&self) -> Option<(usize, usize, T)> {
        let top2 = |f: &dyn Fn(usize) -> Option<T>| {
            let mut best: [Option<(usize, T)>; 2] = [None, None];
            for idx in 0..self.beta.len() {
                let Some(v) = f(idx) else { continue };
                if best[0].is_none_or(|(_, b)| v > b) {
                    best[1] = best[0];
                    best[0] = Some((idx, v));
                } else if best[1].is_none_or(|(_, b)| v > b) {
                    best[1] = Some((idx, v));
                }
            }
            best
        };
        let ups = top2(&|i| self.up(i));
        let downs = top2(&|j| self.down(j));
        let mut best: Option<(usize, usize, T)> = None;
        for u in ups.iter().flatten() {
            for d in downs.iter().flatten() {
                if u.0 == d.0 {
                    continue;
                }
                let v = u.1 + d.1;
                let better = match best {
                    None => true,
                    Some((bi, bj, bv)) => v > bv || (v == bv && (u.0, d.0) < (bi, bj)),
                };
                if better {
                    best = Some((u.0, d.0, v));
                }
            }
        }
        best
    }

    /// Exact maximizer of the objective along `beta_i += t, beta_j -= t`.
    ///
    /// Called only for a violating pair, so the right derivative at `t = 0` is
    /// positive. The objective is concave and piecewise quadratic with kinks at
    /// `-beta_i` and `beta_j`; walk the segments of `[0, hi]` until the
    /// derivative changes sign.
    fn step(&self, i: usize, j: usize) -> T {
        let (bi, bj, c, eps) = (self.beta[i], self.beta[j], self.c, self.eps);
        let eta = self.k[[i, i]] + self.k[[j, j]] - T::lit(2.0) * self.k[[i, j]];
        let lin = self.grad[i] - self.grad[j];
        let hi = (c - bi).min(bj + c);
        let mut knots = vec![T::zero(), hi];
        for b in [-bi, bj] {
            if b > T::zero() && b < hi {
                knots.push(b);
            }
        }
        knots.sort_by(crate::scalar::cmp_scalar);
        knots.dedup();
        for w in knots.windows(2) {
            let mid = (w[0] + w[1]) / T::lit(2.0);
            let si = if bi + mid >= T::zero() { T::one() } else { -T::one() };
            let sj = if bj - mid >= T::zero() { T::one() } else { -T::one() };
            let slope = lin - eps * si + eps * sj;
            if eta > T::zero() {
                let t = slope / eta;
                if t <= w[0] {
                    return w[0];
                }
                if t < w[1] {
                    return t;
                }
            } else if slope <= T::zero() {
                return w[0];
            }
        }
        hi
    }

    fn apply(&mut self, i: usize, j: usize, t: T) {
        let c = self.c;
        self.beta[i] = (self.beta[i] + t).max(-c).min(c);
        self.beta[j] = (self.beta[j] - t).max(-c).min(c);
        for (r, g) in self.grad.iter_mut().enumerate() {
            *g -= t * (self.k[[r, i]] - self.k[[r, j]]);
        }
    }

    fn bias(&self) -> T {
        let mut sum = T::zero();
        let mut count = 0usize;
        let mut lower = T::neg_infinity();
        let mut upper = T::infinity();
        for (&b, &g) in self.beta.iter().zip(&self.grad) {
            if b.abs() > T::zero() && b.abs() < self.c {
                let s = if b > T::zero() { T::one() } else { -T::one() };
                sum += g - self.eps * s;
                count += 1;
            } else if b >= self.c {
                upper = upper.min(g - self.eps);
            } else if b <= -self.c {
                lower = lower.max(g + self.eps);
            } else {
                lower = lower.max(g - self.eps);
                upper = upper.min(g + self.eps);
            }
        }
        if count > 0 {
            sum / T::from_count(count)
        } else if lower.is_finite() && upper.is_finite() {
            (lower + upper) / T::lit(2.0)
        } else if lower.is_finite() {
            lower
        } else {
            upper
        }
    }
}

pub fn fit_svr<T: Scalar>(x: ArrayView2<'_, T>, y: &[T], cfg: &SvrConfig) -> Result<SvrModel<T>> {
    cfg.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Empty("svr needs at least two samples"));
    }
    if y.len() != n {
        return Err(Error::dim(n, y.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::config("svr inputs must be finite"));
    }
    let gamma = T::lit(cfg.resolved_gamma(x.ncols()));
    let k = kernel_matrix(x, gamma);
    let eps = T::lit(cfg.epsilon_tube);
    let tol = T::lit(cfg.kkt_tolerance);
    let mut s = Solver { k: &k, c: T::lit(cfg.c_penalty), eps, beta: vec![T::zero(); n], grad: y.to_vec() };
    let budget = cfg.max_passes.saturating_mul(n);
    let mut trace = vec![T::zero()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        match s.working_pair() {
            Some((i, j, v)) if v > tol => {
                let t = s.step(i, j);
                if !(t > T::zero()) {
                    break;
                }
                s.apply(i, j, t);
                iterations += 1;
                trace.push(dual_objective(&k, y, &s.beta, eps));
            }
            _ => {
                converged = true;
                break;
            }
        }
    }
    let bias = s.bias();
    let keep: Vec<usize> = (0..n).filter(|&i| s.beta[i] != T::zero()).collect();
    let support = x.select(ndarray::Axis(0), &keep);
    let dual_coefficients = keep.iter().map(|&i| s.beta[i]).collect();
    Ok(SvrModel { support, dual_coefficients, bias, gamma, converged, iterations, objective_trace: trace })
}

pub fn predict_svr<T: Scalar>(m: &SvrModel<T>, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
    if x.ncols() != m.support.ncols() {
        return Err(Error::dim(m.support.ncols(), x.ncols()));
    }
    Ok(x.rows().into_iter().map(|r| m.decision(&r.to_vec())).collect())
}
