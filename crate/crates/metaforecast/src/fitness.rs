//! Fitness functions: train a candidate, score it on the validation split.

use metaforecast_core::arima::{fit_arima, ArimaModel, ArimaOrder, FitSettings};
use metaforecast_core::evaluation::mse;
use metaforecast_core::metaheuristics::{Assignment, Objective};
use metaforecast_core::neural::{train_network, LossCurve, Network, NetworkKind, NetworkSpec, NeuralError, TrainingConfig};

use crate::config::{ExperimentConfig, ModelKind};
use crate::pipeline::Prepared;

/// Runs a batch of evaluations sequentially or on a fixed-size pool.
/// Results come back in input order either way.
pub struct Workers(Option<rayon::ThreadPool>);

impl Workers {
    pub fn new(count: usize) -> Self {
        if count <= 1 {
            return Self(None);
        }
        Self(rayon::ThreadPoolBuilder::new().num_threads(count).build().ok())
    }

    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
        use rayon::prelude::*;
        match &self.0 {
            Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            None => items.iter().map(f).collect(),
        }
    }
}

pub fn network_spec(cfg: &ExperimentConfig, model: ModelKind, features: usize) -> NetworkSpec {
    let (kind, widths) = match model {
        ModelKind::Ann => (NetworkKind::Ann, cfg.models.ann_widths.clone()),
        ModelKind::Lstm => (NetworkKind::Lstm, cfg.models.recurrent_widths.to_vec()),
        ModelKind::Gru => (NetworkKind::Gru, cfg.models.recurrent_widths.to_vec()),
        ModelKind::Arima => panic!("ARIMA has no network spec"),
    };
    let mut spec = NetworkSpec::with_widths(kind, features, cfg.window.lookback, cfg.window.horizon, widths);
    spec.pin_gru_gate_biases = cfg.models.pin_gru_gate_biases;
    spec
}

/// Decodes `learning_rate`, `batch_size` and `epochs`.
pub fn training_config(params: &Assignment, seed: u64) -> TrainingConfig {
    let lr = params.real("learning_rate").unwrap_or(f64::NAN);
    let batch = params.integer("batch_size").unwrap_or(0).max(0) as usize;
    let epochs = params.integer("epochs").unwrap_or(0).max(0) as usize;
    TrainingConfig::new(lr, batch, epochs, seed)
}

pub fn arima_order(params: &Assignment) -> ArimaOrder {
    let get = |n: &str| params.integer(n).unwrap_or(0).max(0) as usize;
    ArimaOrder::new(get("p"), get("d"), get("q"))
}

/// Validation MSE, in scaled units, of a network trained on the train split.
pub struct NeuralFitness<'a> {
    pub prepared: &'a Prepared,
    pub spec: NetworkSpec,
    /// Every candidate trains from this seed, so fitness depends only on
    /// the hyperparameters.
    pub seed: u64,
    pub workers: &'a Workers,
}

impl NeuralFitness<'_> {
    pub fn train(&self, params: &Assignment, seed: u64) -> Result<(Network, LossCurve), NeuralError> {
        train_network(&self.spec, &self.prepared.train, &self.prepared.validation, &training_config(params, seed))
    }
}

impl Objective for NeuralFitness<'_> {
    fn evaluate(&self, params: &Assignment) -> f64 {
        match self.train(params, self.seed) {
            Ok((_, curve)) => curve.final_validation().unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }

    fn evaluate_batch(&self, batch: &[Assignment]) -> Vec<f64> {
        self.workers.map(batch, |a| self.evaluate(a))
    }
}

/// MSE, in original units, of rolling 24-hour forecasts over the
/// validation windows from a model fitted on the training rows.
pub struct ArimaFitness<'a> {
    pub prepared: &'a Prepared,
    pub settings: FitSettings,
    pub workers: &'a Workers,
}

pub fn arima_settings(cfg: &ExperimentConfig) -> FitSettings {
    FitSettings {
        include_intercept: cfg.arima.include_intercept,
        min_obs_per_param: cfg.arima.min_obs_per_param,
        ..FitSettings::default()
    }
}

impl ArimaFitness<'_> {
    pub fn fit(&self, order: ArimaOrder) -> Result<ArimaModel, String> {
        let train = &self.prepared.target_series[..self.prepared.splits.train.len()];
        fit_arima(train, order, &self.settings).map_err(|e| e.to_string())
    }

    /// Forecasts for `count` windows whose targets start at `origin`.
    pub fn forecasts(&self, model: &ArimaModel, origin: usize, count: usize) -> Result<Vec<f64>, String> {
        let p = self.prepared;
        let f = model
            .rolling_forecasts(&p.target_series, origin, count, p.horizon)
            .map_err(|e| e.to_string())?;
        let flat: Vec<f64> = f.into_iter().flatten().collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err("forecast is not finite".into());
        }
        Ok(flat)
    }

    pub fn validation_mse(&self, order: ArimaOrder) -> Result<f64, String> {
        let p = self.prepared;
        let model = self.fit(order)?;
        let preds = self.forecasts(&model, p.validation_origin(), p.validation.len())?;
        mse(&p.validation_actuals(), &preds).map_err(|e| e.to_string())
    }
}

impl Objective for ArimaFitness<'_> {
    fn evaluate(&self, params: &Assignment) -> f64 {
        self.validation_mse(arima_order(params)).unwrap_or(f64::INFINITY)
    }

    fn evaluate_batch(&self, batch: &[Assignment]) -> Vec<f64> {
        self.workers.map(batch, |a| self.evaluate(a))
    }
}
