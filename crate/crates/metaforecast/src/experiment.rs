//! One benchmark cell (method x model x trial) and the full matrix.

use std::collections::BTreeMap;
use std::time::Instant;

use metaforecast_core::evaluation::{MetricReport, DEFAULT_MAPE_FLOOR};
use metaforecast_core::metaheuristics::{Assignment, Objective, OptimizationResult, ParamValue};
use metaforecast_core::neural::to_bytes;
use metaforecast_core::seed::derive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Method, ModelKind};
use crate::fitness::{arima_order, arima_settings, network_spec, ArimaFitness, NeuralFitness, Workers};
use crate::pipeline::Prepared;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Integer(i64),
    Real(f64),
}

impl HyperValue {
    pub fn as_f64(self) -> f64 {
        match self {
            HyperValue::Integer(v) => v as f64,
            HyperValue::Real(v) => v,
        }
    }
}

impl std::fmt::Display for HyperValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HyperValue::Integer(v) => write!(f, "{v}"),
            HyperValue::Real(v) => write!(f, "{v}"),
        }
    }
}

pub type Hyperparameters = BTreeMap<String, HyperValue>;

fn hyperparameters(a: &Assignment) -> Hyperparameters {
    a.iter()
        .map(|(k, v)| {
            let v = match v {
                ParamValue::Integer(i) => HyperValue::Integer(i),
                ParamValue::Real(r) => HyperValue::Real(r),
            };
            (k.to_string(), v)
        })
        .collect()
}

/// `None` stands for a failed (non-finite) value in the JSON log.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: Hyperparameters,
    pub fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossCurveRecord {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

/// A few test windows, original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSample {
    pub windows: Vec<usize>,
    pub actual: Vec<Vec<f64>>,
    pub predicted: Vec<Vec<f64>>,
}

/// Fitted ARIMA coefficients as full-precision decimal text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaSummary {
    pub order: [usize; 3],
    pub intercept: String,
    pub ar: Vec<String>,
    pub ma: Vec<String>,
    pub noise_variance: String,
    pub converged: bool,
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub metaheuristic: Method,
    pub model: ModelKind,
    pub trial: usize,
    pub trial_seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub best_hyperparameters: Hyperparameters,
    /// Validation MSE of the chosen candidate during the search.
    pub validation_fitness: Option<f64>,
    pub test_mse: Option<f64>,
    pub test_mape: Option<f64>,
    pub mape_excluded: Option<usize>,
    pub test_points: Option<usize>,
    /// Best fitness after initialization and after each generation.
    pub fitness_trace: Vec<Option<f64>>,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub explored: Vec<Candidate>,
    pub loss_curve: Option<LossCurveRecord>,
    pub forecast: Option<ForecastSample>,
    pub arima: Option<ArimaSummary>,
    /// SHA-256 of the parameter blob of the retrained network.
    pub parameters_sha256: Option<String>,
    pub duration_secs: f64,
    #[serde(skip)]
    pub parameters_blob: Option<Vec<u8>>,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// The record with timing fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self { duration_secs: 0.0, ..self.clone() }
    }
}

/// Seeds of one (model, trial) pair. Every method of a trial shares them,
/// so rows are compared on equal footing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub trial: u64,
    /// Training seed of every candidate during the search.
    pub search: u64,
    /// Training seed of the final retrain.
    pub retrain: u64,
}

impl CellSeeds {
    pub fn new(master: u64, model: ModelKind, trial: usize) -> Self {
        let model_index = ModelKind::ALL.iter().position(|&m| m == model).unwrap() as u64;
        let t = derive(derive(master, 0x100 + model_index), trial as u64);
        Self { trial: t, search: derive(t, 1), retrain: derive(t, 2) }
    }

    pub fn optimizer(&self, method: Method) -> u64 {
        derive(self.trial, 0x10 + Method::ALL.iter().position(|&m| m == method).unwrap() as u64)
    }
}

fn manual_assignment(cfg: &ExperimentConfig, model: ModelKind) -> Assignment {
    let m = &cfg.manual;
    if model.is_neural() {
        Assignment::new(vec![
            ("learning_rate".into(), ParamValue::Real(m.learning_rate)),
            ("batch_size".into(), ParamValue::Integer(m.batch_size as i64)),
            ("epochs".into(), ParamValue::Integer(m.epochs as i64)),
        ])
    } else {
        Assignment::new(vec![
            ("p".into(), ParamValue::Integer(m.arima[0] as i64)),
            ("d".into(), ParamValue::Integer(m.arima[1] as i64)),
            ("q".into(), ParamValue::Integer(m.arima[2] as i64)),
        ])
    }
}

fn sample_windows(total: usize, wanted: usize) -> Vec<usize> {
    match (total, wanted.min(total)) {
        (0, _) | (_, 0) => Vec::new(),
        (_, 1) => vec![0],
        (n, m) => (0..m).map(|k| k * (n - 1) / (m - 1)).collect(),
    }
}

struct Evaluated {
    predictions: Vec<f64>,
    loss_curve: Option<LossCurveRecord>,
    arima: Option<ArimaSummary>,
    blob: Option<Vec<u8>>,
    /// Validation score of the retrained model, used by the manual row.
    validation: f64,
}

fn retrain_and_predict(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    model: ModelKind,
    params: &Assignment,
    seeds: CellSeeds,
    workers: &Workers,
) -> Result<Evaluated, String> {
    if model.is_neural() {
        let spec = network_spec(cfg, model, prepared.features());
        let fitness = NeuralFitness { prepared, spec, seed: seeds.search, workers };
        let (net, curve) = fitness.train(params, seeds.retrain).map_err(|e| format!("retraining: {e}"))?;
        let scaled = net.predict_dataset(&prepared.test).map_err(|e| e.to_string())?;
        let predictions = prepared.scaler.inverse_column(prepared.target, &scaled);
        if predictions.iter().any(|v| !v.is_finite()) {
            return Err("test forecast is not finite".into());
        }
        Ok(Evaluated {
            predictions,
            validation: curve.final_validation().unwrap_or(f64::INFINITY),
            loss_curve: Some(LossCurveRecord { train: curve.train, validation: curve.validation }),
            arima: None,
            blob: Some(to_bytes(&net)),
        })
    } else {
        let fitness = ArimaFitness { prepared, settings: arima_settings(cfg), workers };
        let order = arima_order(params);
        let fitted = fitness.fit(order)?;
        let predictions = fitness.forecasts(&fitted, prepared.test_origin(), prepared.test.len())?;
        let validation = fitness.validation_mse(order).unwrap_or(f64::INFINITY);
        let text = |x: f64| format!("{x:e}");
        Ok(Evaluated {
            predictions,
            validation,
            loss_curve: None,
            arima: Some(ArimaSummary {
                order: [order.p, order.d, order.q],
                intercept: text(fitted.intercept()),
                ar: fitted.ar_coeffs().iter().map(|&x| text(x)).collect(),
                ma: fitted.ma_coeffs().iter().map(|&x| text(x)).collect(),
                noise_variance: text(fitted.noise_variance()),
                converged: fitted.converged(),
                stationary: fitted.is_stationary(),
            }),
            blob: None,
        })
    }
}

/// Runs the search for one cell, or evaluates the fixed manual choice.
pub fn search(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    method: Method,
    model: ModelKind,
    seeds: CellSeeds,
    workers: &Workers,
) -> Result<Option<OptimizationResult>, String> {
    let Some(algorithm) = method.algorithm() else { return Ok(None) };
    let space = cfg.search.space(model).map_err(|e| e.to_string())?;
    let opt = cfg.optimizer.to_config(seeds.optimizer(method));
    let objective: Box<dyn Objective + '_> = if model.is_neural() {
        Box::new(NeuralFitness { prepared, spec: network_spec(cfg, model, prepared.features()), seed: seeds.search, workers })
    } else {
        Box::new(ArimaFitness { prepared, settings: arima_settings(cfg), workers })
    };
    algorithm.optimize(&space, objective.as_ref(), &opt).map(Some).map_err(|e| e.to_string())
}

/// One (method, model, trial) run. Failures are recorded, not returned.
pub fn run_cell(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    method: Method,
    model: ModelKind,
    trial: usize,
    workers: &Workers,
) -> RunRecord {
    let started = Instant::now();
    let seeds = CellSeeds::new(cfg.seed, model, trial);
    let mut record = RunRecord {
        config_hash: cfg.hash(),
        metaheuristic: method,
        model,
        trial,
        trial_seed: seeds.trial,
        status: RunStatus::Failed,
        error: None,
        best_hyperparameters: Hyperparameters::new(),
        validation_fitness: None,
        test_mse: None,
        test_mape: None,
        mape_excluded: None,
        test_points: None,
        fitness_trace: Vec::new(),
        evaluations: 0,
        failed_evaluations: 0,
        explored: Vec::new(),
        loss_curve: None,
        forecast: None,
        arima: None,
        parameters_sha256: None,
        duration_secs: 0.0,
        parameters_blob: None,
    };
    if let Err(e) = fill_record(cfg, prepared, method, model, seeds, workers, &mut record) {
        record.error = Some(e);
    }
    record.duration_secs = started.elapsed().as_secs_f64();
    record
}

fn fill_record(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    method: Method,
    model: ModelKind,
    seeds: CellSeeds,
    workers: &Workers,
    record: &mut RunRecord,
) -> Result<(), String> {
    let best = match search(cfg, prepared, method, model, seeds, workers)? {
        Some(result) => {
            record.fitness_trace = result.trace.iter().map(|&f| finite(f)).collect();
            record.evaluations = result.evaluations;
            record.failed_evaluations = result.failed_evaluations;
            record.explored = result
                .history
                .iter()
                .map(|e| Candidate { params: hyperparameters(&e.params), fitness: finite(e.fitness) })
                .collect();
            record.validation_fitness = finite(result.best_fitness);
            record.best_hyperparameters = hyperparameters(&result.best);
            if !result.best_fitness.is_finite() {
                return Err("every candidate failed".into());
            }
            result.best
        }
        None => {
            let params = manual_assignment(cfg, model);
            record.best_hyperparameters = hyperparameters(&params);
            record.evaluations = 1;
            params
        }
    };

    let evaluated = retrain_and_predict(cfg, prepared, model, &best, seeds, workers)?;
    if method == Method::Manual {
        let v = finite(evaluated.validation);
        record.validation_fitness = v;
        record.fitness_trace = vec![v];
        record.explored = vec![Candidate { params: record.best_hyperparameters.clone(), fitness: v }];
        record.failed_evaluations = usize::from(v.is_none());
    }
    let actuals = prepared.test_actuals();
    let metrics = MetricReport::compute(&actuals, &evaluated.predictions, DEFAULT_MAPE_FLOOR).map_err(|e| e.to_string())?;
    let h = prepared.horizon;
    let windows = sample_windows(prepared.test.len(), cfg.report.forecast_windows);
    record.forecast = Some(ForecastSample {
        actual: windows.iter().map(|&w| actuals[w * h..(w + 1) * h].to_vec()).collect(),
        predicted: windows.iter().map(|&w| evaluated.predictions[w * h..(w + 1) * h].to_vec()).collect(),
        windows,
    });
    record.test_mse = Some(metrics.mse);
    record.test_mape = Some(metrics.mape);
    record.mape_excluded = Some(metrics.excluded_count);
    record.test_points = Some(metrics.sample_count);
    record.loss_curve = evaluated.loss_curve;
    record.arima = evaluated.arima;
    record.parameters_sha256 = evaluated.blob.as_ref().map(|b| hex::encode(Sha256::digest(b)));
    record.parameters_blob = evaluated.blob;
    record.status = RunStatus::Completed;
    Ok(())
}

/// Every configured method plus the manual row, for every model and trial.
/// `progress` sees each record as it completes.
pub fn run_matrix(cfg: &ExperimentConfig, prepared: &Prepared, mut progress: impl FnMut(&RunRecord)) -> Vec<RunRecord> {
    let workers = Workers::new(cfg.worker_count());
    let mut methods = cfg.optimizer.algorithms.clone();
    methods.push(Method::Manual);
    let mut records = Vec::new();
    for &method in &methods {
        for &model in &cfg.models.kinds {
            for trial in 1..=cfg.trials {
                let r = run_cell(cfg, prepared, method, model, trial, &workers);
                progress(&r);
                records.push(r);
            }
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::load_and_prepare;

    fn tiny() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk();
        cfg.models.ann_widths = vec![6];
        cfg.models.recurrent_widths = [4, 5];
        cfg.optimizer.population = 5;
        cfg.optimizer.generations = 1;
        cfg.search.epochs = [1, 2];
        cfg.manual.epochs = 2;
        cfg.trials = 1;
        cfg
    }

    #[test]
    fn sample_window_spacing() {
        assert_eq!(sample_windows(10, 3), vec![0, 4, 9]);
        assert_eq!(sample_windows(2, 5), vec![0, 1]);
        assert_eq!(sample_windows(5, 1), vec![0]);
        assert!(sample_windows(0, 3).is_empty());
    }

    #[test]
    fn manual_row_evaluates_once() {
        let cfg = tiny();
        let p = load_and_prepare(&cfg).unwrap();
        let w = Workers::new(1);
        for model in ModelKind::ALL {
            let r = run_cell(&cfg, &p, Method::Manual, model, 1, &w);
            assert!(r.completed(), "{model}: {:?}", r.error);
            assert_eq!(r.evaluations, 1);
            assert_eq!(r.explored.len(), 1);
            assert_eq!(r.test_points, Some(p.test.len() * 24));
            assert_eq!(r.parameters_sha256.is_some(), model.is_neural());
        }
    }

    #[test]
    fn search_cell_is_deterministic() {
        let cfg = tiny();
        let p = load_and_prepare(&cfg).unwrap();
        let w = Workers::new(1);
        let a = run_cell(&cfg, &p, Method::De, ModelKind::Ann, 1, &w);
        let b = run_cell(&cfg, &p, Method::De, ModelKind::Ann, 1, &w);
        assert!(a.completed());
        assert_eq!(a.without_timing(), b.without_timing());
        assert_eq!(a.evaluations, 10);
        assert_eq!(a.fitness_trace.len(), 2);
    }

    #[test]
    fn record_json_round_trip() {
        let cfg = tiny();
        let p = load_and_prepare(&cfg).unwrap();
        let r = run_cell(&cfg, &p, Method::Pso, ModelKind::Arima, 1, &Workers::new(1));
        let json = serde_json::to_string(&r).unwrap();
        let back: RunRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RunRecord { parameters_blob: None, ..r });
    }
}
