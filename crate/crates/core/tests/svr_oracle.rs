mod common;

use laborcast::seed::rng_from;
use laborcast::svr::{fit_svr, kernel_matrix, SvrConfig};
use laborcast::Regressor;
use nalgebra::DMatrix;
use ndarray::{array, Array2};
use rand::Rng;

#[test]
fn kernel_matrices_are_psd() {
    let mut rng = rng_from(11);
    for _ in 0..20 {
        let x = Array2::from_shape_fn((10, 3), |_| rng.random_range(-2.0..2.0));
        let gamma = rng.random_range(0.05..3.0);
        let k = kernel_matrix(x.view(), gamma);
        let m = DMatrix::from_fn(10, 10, |i, j| k[[i, j]]);
        assert_eq!(m, m.transpose());
        let min = m.symmetric_eigenvalues().min();
        assert!(min >= -1e-8, "eigenvalue {min}");
    }
}

#[test]
fn five_point_instance_matches_dense_solve() {
    let x = array![[0.0], [0.8], [1.5], [2.1], [3.0]];
    let y = [0.2, 1.1, 0.7, 1.9, 1.4];
    let (c, eps, gamma) = (2.0, 0.1, 0.7);
    let cfg = SvrConfig { c_penalty: c, epsilon_tube: eps, gamma: Some(gamma), kkt_tolerance: 1e-10, ..SvrConfig::default() };
    let m = fit_svr(x.view(), &y, &cfg).unwrap();
    assert!(m.converged);
    let k = common::rbf_gram(&x, gamma);
    let oracle = common::brute_force_svr(&k, &y, c, eps, 200_000);
    let mut beta = vec![0.0; 5];
    let mut s = 0;
    for i in 0..5 {
        if s < m.n_support() && m.support.row(s) == x.row(i) {
            beta[i] = m.dual_coefficients[s];
            s += 1;
        }
    }
    let gap = common::svr_dual(&k, &y, &beta, eps) - common::svr_dual(&k, &y, &oracle, eps);
    assert!(gap.abs() < 1e-6, "objective gap {gap}");
    // Strict concavity (distinct points) makes the dual solution unique, so the
    // kernel expansions agree too; the oracle's bias comes from the same KKT averaging.
    let f = m.predict(x.view()).unwrap();
    let unbounded: Vec<usize> = (0..5).filter(|&i| oracle[i].abs() > 1e-6 && oracle[i].abs() < c - 1e-6).collect();
    assert!(!unbounded.is_empty());
    let kb = |i: usize, b: &[f64]| (0..5).map(|j| k[[i, j]] * b[j]).sum::<f64>();
    let bias: f64 = unbounded.iter().map(|&i| y[i] - kb(i, &oracle) - eps * oracle[i].signum()).sum::<f64>() / unbounded.len() as f64;
    for i in 0..5 {
        assert!((f[i] - (kb(i, &oracle) + bias)).abs() < 1e-5, "point {i}");
    }
}

#[test]
fn fit_is_deterministic_and_feasible() {
    let mut rng = rng_from(12);
    let x = Array2::from_shape_fn((40, 4), |_| rng.random_range(-1.0..1.0));
    let y: Vec<f64> = x.rows().into_iter().map(|r| f64::sin(r[0]) + r[1] * r[2] + 4.0).collect();
    let cfg = SvrConfig::default();
    let a = fit_svr(x.view(), &y, &cfg).unwrap();
    assert_eq!(a, fit_svr(x.view(), &y, &cfg).unwrap());
    assert!(a.converged);
    assert!(a.dual_coefficients.iter().sum::<f64>().abs() <= cfg.kkt_tolerance);
    assert!(a.dual_coefficients.iter().all(|b| b.abs() <= cfg.c_penalty && *b != 0.0));
    assert!(a.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}
