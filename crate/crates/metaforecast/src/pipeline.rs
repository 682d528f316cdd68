//! Source table to scaled windows: load or generate, clean, split,
//! standardize on the training rows, window.

use metaforecast_core::data::{
    clean_missing, make_windows, split_by_range, DataError, Layout, ScaleDirection, Scaler, Splits, TimeSeriesTable,
    WindowedDataset,
};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::synth;
use crate::weather_csv::{load_weather_csv, LoadOptions};

/// Everything the fitness functions and the final evaluation need.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Cleaned splits in original units.
    pub splits: Splits,
    pub dropped_columns: Vec<String>,
    pub filled_cells: usize,
    pub scaler: Scaler,
    pub target: usize,
    pub lookback: usize,
    pub horizon: usize,
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    pub test: WindowedDataset,
    /// Target column of train, validation and test, concatenated.
    pub target_series: Vec<f64>,
}

impl Prepared {
    pub fn features(&self) -> usize {
        self.splits.train.num_columns()
    }

    pub fn columns(&self) -> &[String] {
        self.splits.train.columns()
    }

    /// Index in `target_series` where the first validation target starts.
    pub fn validation_origin(&self) -> usize {
        self.splits.train.len() + self.lookback
    }

    pub fn test_origin(&self) -> usize {
        self.splits.train.len() + self.splits.validation.len() + self.lookback
    }

    /// Test targets in original units, window-major.
    pub fn test_actuals(&self) -> Vec<f64> {
        let start = self.test_origin();
        (0..self.test.len()).flat_map(|i| self.target_series[start + i..start + i + self.horizon].iter().copied()).collect()
    }

    pub fn validation_actuals(&self) -> Vec<f64> {
        let start = self.validation_origin();
        (0..self.validation.len())
            .flat_map(|i| self.target_series[start + i..start + i + self.horizon].iter().copied())
            .collect()
    }
}

pub fn load_source(cfg: &ExperimentConfig) -> Result<TimeSeriesTable> {
    if let Some(spec) = &cfg.data.synthetic {
        let start = cfg.synthetic_start().ok_or_else(|| HarnessError::InvalidConfig("bad synthetic start".into()))?;
        return Ok(synth::generate(spec, start, cfg.seed));
    }
    let path = cfg.data.path.as_ref().ok_or_else(|| HarnessError::InvalidConfig("no data path".into()))?;
    load_weather_csv(path, LoadOptions { fill_time_gaps: cfg.data.fill_time_gaps })
}

pub fn prepare(cfg: &ExperimentConfig, raw: &TimeSeriesTable) -> Result<Prepared> {
    let cleaned = clean_missing(raw, cfg.data.drop_threshold, cfg.data.fill.into())?;
    let dropped_columns =
        raw.columns().iter().filter(|c| !cleaned.columns().contains(c)).cloned().collect::<Vec<_>>();
    let filled_cells = raw.missing_count()
        - dropped_columns.iter().map(|c| raw.column(raw.column_index(c).unwrap()).filter(Option::is_none).count()).sum::<usize>();
    let target = cleaned.column_index(&cfg.data.target)?;
    let splits = split_by_range(&cleaned, &cfg.split_spec()?)?;
    let scaler = Scaler::fit(&splits.train)?;
    let (lookback, horizon) = (cfg.window.lookback, cfg.window.horizon);
    let windows = |t: &TimeSeriesTable| -> Result<WindowedDataset> {
        let scaled = scaler.apply(t, ScaleDirection::Forward)?;
        Ok(make_windows(&scaled, &cfg.data.target, lookback, horizon, Layout::Sequential)?)
    };
    let (train, validation, test) = (windows(&splits.train)?, windows(&splits.validation)?, windows(&splits.test)?);
    let mut target_series = Vec::with_capacity(cleaned.len());
    for t in [&splits.train, &splits.validation, &splits.test] {
        target_series.extend(t.dense_column(target).map_err(HarnessError::from)?);
    }
    if target_series.iter().any(|v| !v.is_finite()) {
        return Err(DataError::MissingValues { column: cfg.data.target.clone() }.into());
    }
    Ok(Prepared {
        splits,
        dropped_columns,
        filled_cells,
        scaler,
        target,
        lookback,
        horizon,
        train,
        validation,
        test,
        target_series,
    })
}

pub fn load_and_prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    prepare(cfg, &load_source(cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_pipeline_shapes() {
        let cfg = ExperimentConfig::desk();
        let p = load_and_prepare(&cfg).unwrap();
        assert_eq!((p.splits.train.len(), p.splits.validation.len(), p.splits.test.len()), (960, 240, 240));
        assert_eq!(p.train.len(), 960 - 27 + 1);
        assert_eq!(p.test.len(), 240 - 27 + 1);
        assert_eq!(p.features(), 8);
        assert_eq!(p.train.input_width(), 24);
        assert_eq!(p.target_series.len(), 1440);
        // scaled targets map back onto the original series
        let back = p.scaler.inverse_column(p.target, p.test.target(5));
        let actual = &p.test_actuals()[5 * 24..6 * 24];
        for (a, b) in back.iter().zip(actual) {
            assert!((a - b).abs() < 1e-9);
        }
        let v = p.validation_actuals();
        let back = p.scaler.inverse_column(p.target, p.validation.target(0));
        assert!((v[0] - back[0]).abs() < 1e-9);
    }

    #[test]
    fn drops_sparse_columns() {
        let cfg = ExperimentConfig::desk();
        let raw = synth::punch_holes(&load_source(&cfg).unwrap(), "precipitation", 0.8, 1);
        let raw = synth::punch_holes(&raw, "temperature", 0.01, 2);
        let p = prepare(&cfg, &raw).unwrap();
        assert_eq!(p.dropped_columns, vec!["precipitation".to_string()]);
        assert_eq!(p.features(), 7);
        assert!(p.filled_cells > 0);
        assert_eq!(p.filled_cells, raw.missing_count() - raw.column(7).filter(Option::is_none).count());
    }
}
