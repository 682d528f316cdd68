//! Forecasting models, population-based hyperparameter search and the
//! time-series transforms that feed them.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! experiment harness and the command line live in the `metaforecast` crate.

#![no_std]

extern crate alloc;

pub mod arima;
pub mod data;
pub mod evaluation;
pub mod metaheuristics;
pub mod neural;
pub mod seed;

pub use arima::{ArimaError, ArimaModel, ArimaOrder, FitSettings};
pub use data::{
    DataError, FillPolicy, HourRange, HourStamp, Layout, Scaler, ScaleDirection, SplitSpec,
    Splits, TimeSeriesTable, WindowedDataset,
};
pub use evaluation::{mape, mse, MetricError, MetricReport};
pub use neural::{LossCurve, Network, NetworkKind, NetworkSpec, NeuralError, TrainingConfig};
pub use metaheuristics::{
    Assignment, Objective, OptimizationResult, OptimizerConfig, OptimizerError, ParamKind,
    ParamSpec, ParamValue, SearchSpace,
};
