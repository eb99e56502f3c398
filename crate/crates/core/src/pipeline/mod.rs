//! Metrics, feature selection and the model-by-scaler benchmark grid.
//!
//! Order of a run: shift the target by the horizon, split chronologically,
//! impute the training block on its own, rank features on the training block,
//! then fit and score every cell. The hold-out block is imputed from the full
//! series; nothing fitted reads it.

mod config;
mod metrics;
mod report;

pub use config::RunConfig;
pub use metrics::{directional_accuracy, mape, mse, row_min, MetricPair, MAPE_GUARD};
pub use report::{grid_to_delimited, parse_delimited, render_report, BenchmarkGrid, ReportFormat, MIN_COLUMN};

use chrono::NaiveDate;
use ndarray::{concatenate, Array2, Axis};
use rayon::prelude::*;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::linear::{fit_ols, fit_sgd, LinearModel};
use crate::lstm::{predict_windows, train_lstm, windows_from_matrix, LstmParams};
use crate::model::Regressor;
use crate::scalar::Scalar;
use crate::scalers::{fit_scaler, FittedScaler, ScalerKind};
use crate::seed;
use crate::svr::{fit_svr, SvrModel};
use crate::trees::{
    fit_oblivious_gbt, fit_random_forest, fit_second_order_gbt, gain_importance, BoostConfig, Forest, GbtModel,
    ImportanceRanking, ObliviousGbtModel,
};

/// Environment variable capping cell-level parallelism; `0` runs sequentially.
pub const THREADS_ENV: &str = "LABORCAST_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    LinearRegression,
    SgdRegressor,
    RandomForest,
    XgboostStyle,
    Svr,
    CatboostStyle,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::LinearRegression,
        ModelKind::SgdRegressor,
        ModelKind::RandomForest,
        ModelKind::XgboostStyle,
        ModelKind::Svr,
        ModelKind::CatboostStyle,
        ModelKind::Lstm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::LinearRegression => "LinearRegression",
            ModelKind::SgdRegressor => "SGDRegressor",
            ModelKind::RandomForest => "RandomForest",
            ModelKind::XgboostStyle => "XGBoost-style",
            ModelKind::Svr => "SVR",
            ModelKind::CatboostStyle => "CatBoost-style",
            ModelKind::Lstm => "LSTM",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// True for models whose fit never draws random numbers.
    pub fn is_deterministic(self) -> bool {
        matches!(self, ModelKind::LinearRegression | ModelKind::XgboostStyle | ModelKind::Svr | ModelKind::CatboostStyle)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Seed for every cell of a model row. The scaler is left out on purpose, so
/// monotone rescaling cannot change a tree model's random draws.
pub fn cell_seed(master: u64, model: ModelKind) -> u64 {
    seed::derive(master, "model", &[model.index() as u64])
}

/// Ranks features by oblivious-booster gain on `train` and returns the first `k` codes.
pub fn select_top_k<T: Scalar>(train: &Dataset<T>, k: usize, cfg: &BoostConfig) -> Result<Vec<String>> {
    Ok(rank_features(train, k, cfg)?.top(k))
}

pub fn rank_features<T: Scalar>(train: &Dataset<T>, k: usize, cfg: &BoostConfig) -> Result<ImportanceRanking<T>> {
    if k == 0 || k > train.n_cols() {
        return Err(Error::config(format!("k = {k} is outside 1..={}", train.n_cols())));
    }
    let x = train.feature_matrix()?;
    let model = fit_oblivious_gbt(x.view(), train.require_target()?, cfg)?;
    gain_importance(&model, train.feature_names())
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel<T> {
    Linear(LinearModel<T>),
    Forest(Forest<T>),
    Gbt(GbtModel<T>),
    Svr(SvrModel<T>),
    Oblivious(ObliviousGbtModel<T>),
    Lstm(LstmParams<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult<T> {
    pub model: ModelKind,
    pub scaler: ScalerKind,
    pub metrics: MetricPair<T>,
    pub predictions: Vec<T>,
    pub fitted_scaler: FittedScaler<T>,
    pub fitted_model: FittedModel<T>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun<T> {
    pub grid: BenchmarkGrid<T>,
    /// Feature codes given to every model, in rank order.
    pub selected: Vec<String>,
    /// `None` when selection was bypassed.
    pub ranking: Option<ImportanceRanking<T>>,
    pub train_dates: Vec<NaiveDate>,
    pub test_dates: Vec<NaiveDate>,
    pub test_targets: Vec<T>,
    /// Model-major, then scaler, both in roster order.
    pub cells: Vec<CellResult<T>>,
}

impl<T: Scalar> BenchmarkRun<T> {
    pub fn cell(&self, model: ModelKind, scaler: ScalerKind) -> &CellResult<T> {
        &self.cells[model.index() * ScalerKind::ALL.len() + scaler.index()]
    }

    pub fn warnings(&self) -> impl Iterator<Item = String> + '_ {
        self.cells
            .iter()
            .filter_map(|c| c.warning.as_ref().map(|w| format!("{} / {}: {w}", c.model, c.scaler)))
    }
}

/// Training and hold-out blocks after selection, ready for the grid.
struct Prepared<T> {
    x_train: Array2<T>,
    y_train: Vec<T>,
    x_test: Array2<T>,
    y_test: Vec<T>,
    dates: Vec<NaiveDate>,
}

/// Reads `LABORCAST_THREADS`; unset or unparsable means the rayon default.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

pub fn run_benchmark<T: Scalar>(ds: &Dataset<T>, cfg: &RunConfig) -> Result<BenchmarkRun<T>> {
    run_benchmark_with_threads(ds, cfg, threads_from_env())
}

/// `threads`: `None` uses the global pool, `Some(0)` runs sequentially.
pub fn run_benchmark_with_threads<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &RunConfig,
    threads: Option<usize>,
) -> Result<BenchmarkRun<T>> {
    cfg.validate()?;
    let ds = ds.shift_target(cfg.horizon)?;
    ds.require_target()?;
    let n = ds.n_rows();
    let b = cfg.split.boundary_index(n)?;
    let train = ds.slice_rows(0, b).impute()?;
    let full = ds.impute()?;
    let test = full.slice_rows(b, n);

    let (selected, ranking) = if cfg.all_features {
        (train.feature_names().to_vec(), None)
    } else {
        let source = if cfg.select_on_full { &full } else { &train };
        let sel_cfg = BoostConfig { seed: seed::derive(cfg.seed, "select", &[]), ..cfg.cat.clone() };
        let ranking = rank_features(source, cfg.top_k, &sel_cfg)?;
        (ranking.top(cfg.top_k), Some(ranking))
    };
    let train = train.select_columns(&selected)?;
    let test = test.select_columns(&selected)?;
    let prep = Prepared {
        x_train: train.feature_matrix()?,
        y_train: train.require_target()?.to_vec(),
        x_test: test.feature_matrix()?,
        y_test: test.require_target()?.to_vec(),
        dates: ds.dates().to_vec(),
    };

    let jobs: Vec<(ModelKind, ScalerKind)> =
        ModelKind::ALL.iter().flat_map(|&m| ScalerKind::ALL.iter().map(move |&s| (m, s))).collect();
    let run_cell = |&(m, s): &(ModelKind, ScalerKind)| {
        fit_cell(&prep, m, s, cfg).map_err(|e| Error::Cell { model: m.label(), scaler: s.label(), source: Box::new(e) })
    };
    let cells: Vec<CellResult<T>> = match threads {
        Some(0) => jobs.iter().map(run_cell).collect::<Result<_>>()?,
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| jobs.par_iter().map(run_cell).collect::<Result<_>>())?,
        None => jobs.par_iter().map(run_cell).collect::<Result<_>>()?,
    };

    let rows = ModelKind::ALL
        .iter()
        .map(|&m| std::array::from_fn(|s| cells[m.index() * ScalerKind::ALL.len() + s].metrics))
        .collect();
    Ok(BenchmarkRun {
        grid: BenchmarkGrid::from_cells(rows)?,
        selected,
        ranking,
        train_dates: prep.dates[..b].to_vec(),
        test_dates: prep.dates[b..].to_vec(),
        test_targets: prep.y_test,
        cells,
    })
}

fn fit_cell<T: Scalar>(p: &Prepared<T>, model: ModelKind, scaler: ScalerKind, cfg: &RunConfig) -> Result<CellResult<T>> {
    let fitted_scaler = fit_scaler(scaler, p.x_train.view())?;
    let xtr = fitted_scaler.apply(p.x_train.view())?;
    let xte = fitted_scaler.apply(p.x_test.view())?;
    let seed = cell_seed(cfg.seed, model);
    let ytr = &p.y_train;
    let mut warning = None;
    let (fitted_model, predictions) = match model {
        ModelKind::LinearRegression => {
            let m = fit_ols(xtr.view(), ytr)?;
            let pr = m.predict(xte.view())?;
            (FittedModel::Linear(m), pr)
        }
        ModelKind::SgdRegressor => {
            let m = fit_sgd(xtr.view(), ytr, &crate::linear::SgdConfig { seed, ..cfg.sgd.clone() })?;
            let pr = m.predict(xte.view())?;
            (FittedModel::Linear(m), pr)
        }
        ModelKind::RandomForest => {
            let m = fit_random_forest(xtr.view(), ytr, &crate::trees::ForestConfig { seed, ..cfg.forest.clone() })?;
            let pr = m.predict(xte.view())?;
            (FittedModel::Forest(m), pr)
        }
        ModelKind::XgboostStyle => {
            let m = fit_second_order_gbt(xtr.view(), ytr, &BoostConfig { seed, ..cfg.xgb.clone() })?;
            let pr = m.predict(xte.view())?;
            (FittedModel::Gbt(m), pr)
        }
        ModelKind::Svr => {
            let m = fit_svr(xtr.view(), ytr, &crate::svr::SvrConfig { seed, ..cfg.svr.clone() })?;
            if !m.converged {
                warning = Some(format!("SMO stopped after {} updates without meeting the KKT tolerance", m.iterations));
            }
            let pr = m.predict(xte.view())?;
            (FittedModel::Svr(m), pr)
        }
        ModelKind::CatboostStyle => {
            let m = fit_oblivious_gbt(xtr.view(), ytr, &BoostConfig { seed, ..cfg.cat.clone() })?;
            let pr = m.predict(xte.view())?;
            (FittedModel::Oblivious(m), pr)
        }
        ModelKind::Lstm => {
            let len = cfg.lstm.window_length;
            let b = xtr.nrows();
            if b < len {
                return Err(Error::config(format!("window length {len} exceeds the {b} training rows")));
            }
            let x_all = concatenate(Axis(0), &[xtr.view(), xte.view()]).map_err(|_| Error::dim(xtr.ncols(), xte.ncols()))?;
            // Hold-out labels are never read for training: only windows ending
            // inside the training block are used, and test windows get their
            // labels replaced by NaN before they reach the model.
            let mut y_all = ytr.clone();
            y_all.extend(std::iter::repeat_n(T::nan(), xte.nrows()));
            let set = windows_from_matrix(x_all.view(), &y_all, &p.dates, len)?;
            let n_train = b - len + 1;
            let train_idx: Vec<usize> = (0..n_train).collect();
            let test_idx: Vec<usize> = (n_train..set.len()).collect();
            let fit = train_lstm(&set.subset(&train_idx), &crate::lstm::LstmConfig { seed, ..cfg.lstm.clone() })?;
            let pr = predict_windows(&fit.params, &set.subset(&test_idx))?;
            (FittedModel::Lstm(fit.params), pr)
        }
    };
    if predictions.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { model: model.label(), detail: "non-finite hold-out prediction".into() });
    }
    let metrics = MetricPair::evaluate(&p.y_test, &predictions)?;
    Ok(CellResult { model, scaler, metrics, predictions, fitted_scaler, fitted_model, warning })
}
