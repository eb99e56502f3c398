//! Regression toolkit and benchmark harness for monthly unemployment-rate
//! nowcasting from macroeconomic indicators.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

// `!(a > b)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod error;
pub mod linear;
pub mod lstm;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod scalers;
pub mod seed;
pub mod svr;
pub mod trees;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use dataio::{FeatureCatalog, SplitSpec};
pub use model::Regressor;
pub use pipeline::{ModelKind, ReportFormat, RunConfig};
pub use scalers::ScalerKind;

pub type Dataset = dataio::Dataset<f64>;
pub type FittedScaler = scalers::FittedScaler<f64>;
pub type LinearModel = linear::LinearModel<f64>;
pub type DecisionTree = trees::DecisionTree<f64>;
pub type Forest = trees::Forest<f64>;
pub type GbtModel = trees::GbtModel<f64>;
pub type ObliviousGbtModel = trees::ObliviousGbtModel<f64>;
pub type ImportanceRanking = trees::ImportanceRanking<f64>;
pub type SvrModel = svr::SvrModel<f64>;
pub type LstmParams = lstm::LstmParams<f64>;
pub type WindowSet = lstm::WindowSet<f64>;
pub type MetricPair = pipeline::MetricPair<f64>;
pub type BenchmarkGrid = pipeline::BenchmarkGrid<f64>;
pub type BenchmarkRun = pipeline::BenchmarkRun<f64>;
