//! Result files written from run records.
//!
//! * `records.jsonl`: one record per line.
//! * `mape_table.csv`: mean test MAPE per method (rows) and model (columns);
//!   a cell with any failed trial reads `failed`.
//! * `best_hyperparameters.csv`: the best trial of each cell by validation
//!   fitness, one row per hyperparameter.
//! * `forecast_<N>.csv`: sampled test windows of record `N` (1-based),
//!   actual and predicted rows.
//! * `loss_curve.csv`: per-epoch losses of the best trial of each neural cell.
//! * `models/run_<N>.mfnn`: parameter blob of record `N`, when available.
//! * `summary.txt`: mean MAPE per model and the ordering of the methods.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::config::{Method, ModelKind};
use crate::error::{HarnessError, Result};
use crate::experiment::RunRecord;

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Write { path: path.into(), source }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| write_err(path)(e.into()))
}

fn csv_row(w: &mut csv::Writer<fs::File>, path: &Path, row: &[String]) -> Result<()> {
    w.write_record(row).map_err(|e| write_err(path)(e.into()))
}

pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(write_err(path))
}

pub fn append_record(record: &RunRecord, path: &Path) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path).map_err(write_err(path))?;
    let mut line = serde_json::to_vec(record).expect("records serialize");
    line.push(b'\n');
    f.write_all(&line).map_err(write_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = fs::File::open(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| HarnessError::Read { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| HarnessError::Parse {
            path: path.into(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        records.push(r);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Mean(f64),
    Failed,
    Missing,
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Mean(v) => Some(v),
            _ => None,
        }
    }
}

fn present<T: PartialEq + Copy>(all: &[T], records: &[RunRecord], key: impl Fn(&RunRecord) -> T) -> Vec<T> {
    all.iter().copied().filter(|m| records.iter().any(|r| key(r) == *m)).collect()
}

pub fn methods_in(records: &[RunRecord]) -> Vec<Method> {
    present(&Method::ALL, records, |r| r.metaheuristic)
}

pub fn models_in(records: &[RunRecord]) -> Vec<ModelKind> {
    present(&ModelKind::ALL, records, |r| r.model)
}

/// Mean test MAPE over the trials of one cell.
pub fn mape_cell(records: &[RunRecord], method: Method, model: ModelKind) -> Cell {
    let cell: Vec<&RunRecord> = records.iter().filter(|r| r.metaheuristic == method && r.model == model).collect();
    if cell.is_empty() {
        return Cell::Missing;
    }
    let mut sum = 0.0;
    for r in &cell {
        match (r.completed(), r.test_mape) {
            (true, Some(m)) => sum += m,
            _ => return Cell::Failed,
        }
    }
    Cell::Mean(sum / cell.len() as f64)
}

/// Completed trial of a cell with the lowest validation fitness.
fn best_run(records: &[RunRecord], method: Method, model: ModelKind) -> Option<(usize, &RunRecord)> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.metaheuristic == method && r.model == model && r.completed())
        .min_by(|a, b| {
            let key = |r: &RunRecord| r.validation_fitness.unwrap_or(f64::INFINITY);
            key(a.1).total_cmp(&key(b.1)).then(a.0.cmp(&b.0))
        })
}

/// Plain-text comparison of the methods for every model.
pub fn summary(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for model in models_in(records) {
        out.push_str(&format!("{model}:"));
        let mut means = Vec::new();
        for method in methods_in(records) {
            match mape_cell(records, method, model) {
                Cell::Mean(v) => {
                    out.push_str(&format!(" {method}={v:.4}"));
                    means.push((method, v));
                }
                Cell::Failed => out.push_str(&format!(" {method}=failed")),
                Cell::Missing => {}
            }
        }
        let get = |m: Method| means.iter().find(|(k, _)| *k == m).map(|x| x.1);
        if let (Some(ga), Some(de), Some(pso)) = (get(Method::Ga), get(Method::De), get(Method::Pso)) {
            out.push_str(&format!(" | de<pso<ga: {}", if de < pso && pso < ga { "yes" } else { "no" }));
        }
        if let Some(manual) = get(Method::Manual) {
            let beats = means.iter().filter(|(m, v)| *m != Method::Manual && *v <= manual).count();
            let searched = means.iter().filter(|(m, _)| *m != Method::Manual).count();
            out.push_str(&format!(" | at or below manual: {beats}/{searched}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct ReportFiles {
    pub records: PathBuf,
    pub mape_table: PathBuf,
    pub best_hyperparameters: PathBuf,
    pub loss_curve: PathBuf,
    pub summary: PathBuf,
    pub forecasts: Vec<PathBuf>,
    pub models: Vec<PathBuf>,
}

pub fn emit_reports(records: &[RunRecord], dir: &Path) -> Result<ReportFiles> {
    if records.is_empty() {
        return Err(HarnessError::Run("no records to report".into()));
    }
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    let mut files = ReportFiles {
        records: dir.join("records.jsonl"),
        mape_table: dir.join("mape_table.csv"),
        best_hyperparameters: dir.join("best_hyperparameters.csv"),
        loss_curve: dir.join("loss_curve.csv"),
        summary: dir.join("summary.txt"),
        ..ReportFiles::default()
    };
    write_records(records, &files.records)?;
    let (methods, models) = (methods_in(records), models_in(records));

    let path = &files.mape_table;
    let mut w = csv_writer(path)?;
    let mut header = vec!["metaheuristic".to_string()];
    header.extend(models.iter().map(|m| m.to_string()));
    csv_row(&mut w, path, &header)?;
    for &method in &methods {
        let mut row = vec![method.to_string()];
        for &model in &models {
            row.push(match mape_cell(records, method, model) {
                Cell::Mean(v) => format!("{v}"),
                Cell::Failed => "failed".into(),
                Cell::Missing => String::new(),
            });
        }
        csv_row(&mut w, path, &row)?;
    }
    w.flush().map_err(write_err(path))?;

    let path = &files.best_hyperparameters;
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, &["metaheuristic", "model", "trial", "validation_fitness", "parameter", "value"].map(String::from))?;
    for &method in &methods {
        for &model in &models {
            if let Some((_, r)) = best_run(records, method, model) {
                for (name, value) in &r.best_hyperparameters {
                    let fitness = r.validation_fitness.map(|v| v.to_string()).unwrap_or_default();
                    csv_row(&mut w, path, &[method.to_string(), model.to_string(), r.trial.to_string(), fitness, name.clone(), value.to_string()])?;
                }
            }
        }
    }
    w.flush().map_err(write_err(path))?;

    let path = &files.loss_curve;
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, &["metaheuristic", "model", "trial", "epoch", "train_mse", "validation_mse"].map(String::from))?;
    for &method in &methods {
        for &model in &models {
            let Some((_, r)) = best_run(records, method, model) else { continue };
            let Some(curve) = &r.loss_curve else { continue };
            for (e, (t, v)) in curve.train.iter().zip(&curve.validation).enumerate() {
                csv_row(&mut w, path, &[method.to_string(), model.to_string(), r.trial.to_string(), (e + 1).to_string(), t.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush().map_err(write_err(path))?;

    for (i, r) in records.iter().enumerate() {
        let n = i + 1;
        if let Some(sample) = &r.forecast {
            let path = dir.join(format!("forecast_{n}.csv"));
            let mut w = csv_writer(&path)?;
            let horizon = sample.actual.first().map_or(0, Vec::len);
            let mut header = vec!["window".to_string(), "series".to_string()];
            header.extend((1..=horizon).map(|h| format!("h{h}")));
            csv_row(&mut w, &path, &header)?;
            for (k, &window) in sample.windows.iter().enumerate() {
                for (label, values) in [("actual", &sample.actual[k]), ("predicted", &sample.predicted[k])] {
                    let mut row = vec![window.to_string(), label.to_string()];
                    row.extend(values.iter().map(|v| v.to_string()));
                    csv_row(&mut w, &path, &row)?;
                }
            }
            w.flush().map_err(write_err(&path))?;
            files.forecasts.push(path);
        }
        if let Some(blob) = &r.parameters_blob {
            let models_dir = dir.join("models");
            fs::create_dir_all(&models_dir).map_err(write_err(&models_dir))?;
            let path = models_dir.join(format!("run_{n}.mfnn"));
            fs::write(&path, blob).map_err(write_err(&path))?;
            files.models.push(path);
        }
    }

    fs::write(&files.summary, summary(records)).map_err(write_err(&files.summary))?;
    Ok(files)
}
