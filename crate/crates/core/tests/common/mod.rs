//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use laborcast::dataio::{join_target, parse_target, reference_dataset, Dataset};
use laborcast::seed::rng_from;
use ndarray::Array2;
use rand::Rng;

pub const TARGET_CSV: &str = laborcast::dataio::REFERENCE_TARGET;

/// Bundled indicators joined with the bundled rate series.
pub fn reference_with_target() -> Dataset<f64> {
    let target = parse_target::<f64>(TARGET_CSV).expect("bundled target parses");
    join_target(&reference_dataset::<f64>(), &target).expect("bundled target joins")
}

pub fn loop_mse(y: &[f64], yhat: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        let d = y[i] - yhat[i];
        s += d * d;
    }
    s / y.len() as f64
}

pub fn loop_mape(y: &[f64], yhat: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        let denom = if y[i].abs() > 1e-8 { y[i].abs() } else { 1e-8 };
        s += (y[i] - yhat[i]).abs() / denom;
    }
    s / y.len() as f64
}

pub fn sort_min(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s[0]
}

pub fn rbf_gram(x: &Array2<f64>, gamma: f64) -> Array2<f64> {
    let n = x.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        (-gamma * d2).exp()
    })
}

pub fn svr_dual(k: &Array2<f64>, y: &[f64], beta: &[f64], eps: f64) -> f64 {
    let n = y.len();
    let mut v = 0.0;
    for i in 0..n {
        v += y[i] * beta[i] - eps * beta[i].abs();
        for j in 0..n {
            v -= 0.5 * beta[i] * beta[j] * k[[i, j]];
        }
    }
    v
}

/// Euclidean projection onto `{z in [0, c]^m : a'z = 0}` with `a = (1.., -1..)`.
fn project(v: &[f64], c: f64) -> Vec<f64> {
    let n = v.len() / 2;
    let a = |i: usize| if i < n { 1.0 } else { -1.0 };
    let at = |nu: f64| -> (Vec<f64>, f64) {
        let z: Vec<f64> = (0..v.len()).map(|i| (v[i] - nu * a(i)).clamp(0.0, c)).collect();
        let s = (0..v.len()).map(|i| a(i) * z[i]).sum();
        (z, s)
    };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi)).0
}

/// Dense accelerated projected-gradient solve of the 2n-variable dual. Returns beta.
pub fn brute_force_svr(k: &Array2<f64>, y: &[f64], c: f64, eps: f64, iters: usize) -> Vec<f64> {
    let n = y.len();
    let step = 1.0 / (2.0 * n as f64);
    let grad = |z: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let kb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[[i, j]] * beta[j]).sum()).collect();
        (0..2 * n).map(|i| if i < n { y[i] - kb[i] - eps } else { kb[i - n] - y[i - n] - eps }).collect()
    };
    let mut z = vec![0.0; 2 * n];
    let mut w = z.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g = grad(&w);
        let ascent: Vec<f64> = (0..2 * n).map(|i| w[i] + step * g[i]).collect();
        let z_next = project(&ascent, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = (0..2 * n).map(|i| z_next[i] + (t - 1.0) / t_next * (z_next[i] - z[i])).collect();
        z = z_next;
        t = t_next;
    }
    (0..n).map(|i| z[i] - z[n + i]).collect()
}

/// Rows of uniform noise; the target depends only on `informative` columns.
pub fn synthetic_selection(seed: u64, n: usize, p: usize, informative: &[usize]) -> Dataset<f64> {
    let mut rng = rng_from(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
    let weights = [3.0, -2.0, 1.5, 1.0, -1.0];
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| informative.iter().zip(weights).map(|(&j, w)| w * (r[j] - 0.5)).sum::<f64>() + 4.0 + 0.01 * rng.random::<f64>())
        .collect();
    let mut d = chrono::NaiveDate::from_ymd_opt(2000, 1, 31).unwrap();
    let mut dates = Vec::with_capacity(n);
    for _ in 0..n {
        dates.push(d);
        let next = d + chrono::Days::new(1);
        d = (next + chrono::Months::new(1)) - chrono::Days::new(1);
    }
    let names = (0..p).map(|j| format!("X{j}")).collect();
    Dataset::from_dense(dates, x, names, Some(y)).expect("synthetic dataset is valid")
}
