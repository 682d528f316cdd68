//! Seeded weather-like series in the loader's column layout.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate};
use metaforecast_core::data::TimeSeriesTable;
use metaforecast_core::seed;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::weather_csv::{feature_columns, stamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub days: usize,
    /// First day, `YYYY-MM-DD`.
    pub start: String,
    /// Generator seed; the experiment seed when absent.
    pub seed: Option<u64>,
    pub mean_temperature: f64,
    pub daily_amplitude: f64,
    pub annual_amplitude: f64,
    /// Innovation std of the AR(1) weather noise on temperature.
    pub noise_std: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            days: 60,
            start: "2010-01-01".into(),
            seed: None,
            mean_temperature: 15.0,
            daily_amplitude: 5.0,
            annual_amplitude: 6.0,
            noise_std: 0.6,
        }
    }
}

/// Temperature is a daily plus an annual sinusoid plus AR(1) noise; the
/// other channels are noisy functions of temperature and slow cycles.
pub fn generate(spec: &SyntheticSpec, start: NaiveDate, fallback_seed: u64) -> TimeSeriesTable {
    let mut rng = seed::rng(seed::derive(spec.seed.unwrap_or(fallback_seed), 0x5e7));
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut z = || -> f64 { unit.sample(&mut rng) };
    let rows = spec.days * 24;
    let first = stamp(start, 0);
    let doy0 = start.ordinal0() as f64;
    let mut timestamps = Vec::with_capacity(rows);
    let mut values = Vec::with_capacity(rows * 8);
    let mut weather = 0.0;
    let mut wind = 0.0;
    for t in 0..rows {
        let hour = (t % 24) as f64;
        let day = doy0 + t as f64 / 24.0;
        weather = 0.85 * weather + spec.noise_std * z();
        wind = 0.9 * wind + 1.2 * z();
        let daily = (2.0 * PI * (hour - 9.0) / 24.0).sin();
        let temperature =
            spec.mean_temperature + spec.annual_amplitude * (2.0 * PI * (day - 110.0) / 365.25).sin() + spec.daily_amplitude * daily + weather;
        let spread = 4.0 + 2.0 * daily + 0.4 * z();
        let dew_point = temperature - spread.max(0.2);
        let humidity = (100.0 - 5.0 * (temperature - dew_point)).clamp(10.0, 100.0);
        let wind_speed = (12.0 + 4.0 * (2.0 * PI * t as f64 / 79.0).sin() + wind).abs();
        let visibility = (40.0 - 0.25 * humidity + z()).clamp(0.5, 50.0);
        let pressure = 101.3 + 0.8 * (2.0 * PI * t as f64 / 120.0).sin() - 0.02 * weather + 0.05 * z();
        let precipitation = (0.8 * z() - 1.2).max(0.0);
        timestamps.push(metaforecast_core::data::HourStamp(first.0 + t as i64));
        values.extend([hour, temperature, dew_point, humidity, wind_speed, visibility, pressure, precipitation].map(Some));
    }
    TimeSeriesTable::new(timestamps, feature_columns(), values).expect("generated rows are ordered")
}

/// Blanks a fraction of cells in `column`, keeping its first value.
pub fn punch_holes(table: &TimeSeriesTable, column: &str, fraction: f64, seed: u64) -> TimeSeriesTable {
    let c = table.column_index(column).expect("column exists");
    let mut rng = seed::rng(seed);
    let width = table.num_columns();
    let mut values = table.values().to_vec();
    for r in 1..table.len() {
        if rng.random::<f64>() < fraction {
            values[r * width + c] = None;
        }
    }
    TimeSeriesTable::new(table.timestamps().to_vec(), table.columns().to_vec(), values).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec { days: 3, ..SyntheticSpec::default() };
        let start = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let a = generate(&spec, start, 7);
        assert_eq!(a.len(), 72);
        assert_eq!(a.num_columns(), 8);
        assert_eq!(a.missing_count(), 0);
        assert_eq!(a, generate(&spec, start, 7));
        assert_ne!(a, generate(&spec, start, 8));
        let temps = a.dense_column(1).unwrap();
        let mean = temps.iter().sum::<f64>() / 72.0;
        assert!((mean - 15.0).abs() < 8.0);
    }

    #[test]
    fn holes() {
        let start = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let t = generate(&SyntheticSpec { days: 5, ..SyntheticSpec::default() }, start, 1);
        let holed = punch_holes(&t, "precipitation", 0.5, 3);
        let missing = holed.missing_count();
        assert!(missing > 30 && missing < 90, "{missing}");
        assert!(holed.get(0, 7).is_some());
    }
}
