use alloc::string::String;
use alloc::vec::Vec;

use super::{DataError, TimeSeriesTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDirection {
    Forward,
    Inverse,
}

/// Per-column standardization fitted on the training split. Uses the
/// population standard deviation (divide by `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    columns: Vec<String>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Scaler {
    pub fn fit(train: &TimeSeriesTable) -> Result<Self, DataError> {
        if train.is_empty() {
            return Err(DataError::EmptyTable);
        }
        let n = train.len() as f64;
        let mut mean = Vec::with_capacity(train.num_columns());
        let mut std = Vec::with_capacity(train.num_columns());
        for c in 0..train.num_columns() {
            let column = train.dense_column(c)?;
            let mu = column.iter().sum::<f64>() / n;
            let var = column.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
            let sigma = libm::sqrt(var);
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(DataError::ConstantColumn { column: train.columns()[c].clone() });
            }
            mean.push(mu);
            std.push(sigma);
        }
        Ok(Self { columns: train.columns().to_vec(), mean, std })
    }

    pub fn from_moments(columns: Vec<String>, mean: Vec<f64>, std: Vec<f64>) -> Result<Self, DataError> {
        if mean.len() != columns.len() || std.len() != columns.len() {
            return Err(DataError::ShapeMismatch { expected: columns.len(), found: mean.len() });
        }
        if let Some(c) = std.iter().position(|s| !(*s > 0.0)) {
            return Err(DataError::ConstantColumn { column: columns[c].clone() });
        }
        Ok(Self { columns, mean, std })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn apply(&self, table: &TimeSeriesTable, direction: ScaleDirection) -> Result<TimeSeriesTable, DataError> {
        if table.num_columns() != self.columns.len() {
            return Err(DataError::ShapeMismatch {
                expected: self.columns.len(),
                found: table.num_columns(),
            });
        }
        let width = self.columns.len();
        let values = table
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v.map(|x| self.scale(i % width, x, direction)))
            .collect();
        TimeSeriesTable::new(table.timestamps().to_vec(), table.columns().to_vec(), values)
    }

    pub fn scale(&self, column: usize, x: f64, direction: ScaleDirection) -> f64 {
        match direction {
            ScaleDirection::Forward => (x - self.mean[column]) / self.std[column],
            ScaleDirection::Inverse => x * self.std[column] + self.mean[column],
        }
    }

    /// Maps scaled values of one column back to original units.
    pub fn inverse_column(&self, column: usize, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&x| self.scale(column, x, ScaleDirection::Inverse)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::HourStamp;
    use alloc::vec;

    fn single(values: Vec<f64>) -> TimeSeriesTable {
        let ts = (0..values.len() as i64).map(HourStamp).collect();
        TimeSeriesTable::from_dense(ts, vec![String::from("x")], values).unwrap()
    }

    #[test]
    fn population_moments() {
        // hand oracle: mean 2, variance (1 + 0 + 1) / 3
        let s = Scaler::fit(&single(vec![1.0, 2.0, 3.0])).unwrap();
        let sigma = libm::sqrt(2.0 / 3.0);
        assert_eq!(s.mean(), &[2.0]);
        assert!((s.std()[0] - sigma).abs() < 1e-15);
        assert!((s.std()[0] - 0.8165).abs() < 1e-4);
        let out = s.apply(&single(vec![1.0, 2.0, 3.0]), ScaleDirection::Forward).unwrap();
        let got = out.dense_column(0).unwrap();
        for (g, e) in got.iter().zip([-1.0 / sigma, 0.0, 1.0 / sigma]) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!((got[2] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_rejected() {
        assert!(matches!(
            Scaler::fit(&single(vec![5.0, 5.0, 5.0])),
            Err(DataError::ConstantColumn { .. })
        ));
    }

    #[test]
    fn shape_mismatch_on_apply() {
        let s = Scaler::fit(&single(vec![1.0, 2.0])).unwrap();
        let wide = TimeSeriesTable::from_dense(
            vec![HourStamp(0)],
            vec![String::from("a"), String::from("b")],
            vec![1.0, 2.0],
        )
        .unwrap();
        assert!(matches!(s.apply(&wide, ScaleDirection::Forward), Err(DataError::ShapeMismatch { .. })));
    }
}
