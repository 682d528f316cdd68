use alloc::string::String;
use alloc::vec::Vec;

use super::DataError;

/// Hours since 1970-01-01T00:00 (no timezone arithmetic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HourStamp(pub i64);

impl HourStamp {
    pub fn next(self) -> Self {
        HourStamp(self.0 + 1)
    }
}

/// Timestamped hourly observations stored row-major. Cells are `None` where
/// the source had no value.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    timestamps: Vec<HourStamp>,
    columns: Vec<String>,
    values: Vec<Option<f64>>,
}

impl TimeSeriesTable {
    pub fn new(
        timestamps: Vec<HourStamp>,
        columns: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Result<Self, DataError> {
        let expected = timestamps.len() * columns.len();
        if values.len() != expected {
            return Err(DataError::ShapeMismatch { expected, found: values.len() });
        }
        if let Some(row) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DataError::TimestampDisorder { row: row + 1 });
        }
        Ok(Self { timestamps, columns, values })
    }

    /// Builds a table with no missing cells.
    pub fn from_dense(
        timestamps: Vec<HourStamp>,
        columns: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self, DataError> {
        Self::new(timestamps, columns, values.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn timestamps(&self) -> &[HourStamp] {
        &self.timestamps
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| DataError::MissingColumn(name.into()))
    }

    pub fn get(&self, row: usize, column: usize) -> Option<f64> {
        self.values[row * self.columns.len() + column]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let width = self.columns.len();
        &self.values[row * width..(row + 1) * width]
    }

    pub fn column(&self, column: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values.iter().skip(column).step_by(self.columns.len().max(1)).copied()
    }

    /// Column values with every cell present.
    pub fn dense_column(&self, column: usize) -> Result<Vec<f64>, DataError> {
        self.column(column)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| DataError::MissingValues { column: self.columns[column].clone() })
    }

    /// Row-major values with every cell present.
    pub fn dense_values(&self) -> Result<Vec<f64>, DataError> {
        match self.values.iter().position(Option::is_none) {
            None => Ok(self.values.iter().map(|v| v.unwrap_or_default()).collect()),
            Some(at) => Err(DataError::MissingValues {
                column: self.columns[at % self.columns.len()].clone(),
            }),
        }
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Copies the rows whose positions satisfy `keep`.
    pub fn filter_rows(&self, mut keep: impl FnMut(usize, HourStamp) -> bool) -> Self {
        let mut timestamps = Vec::new();
        let mut values = Vec::new();
        for (i, &ts) in self.timestamps.iter().enumerate() {
            if keep(i, ts) {
                timestamps.push(ts);
                values.extend_from_slice(self.row(i));
            }
        }
        Self { timestamps, columns: self.columns.clone(), values }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<Self, DataError> {
        let idx = names.iter().map(|n| self.column_index(n)).collect::<Result<Vec<_>, _>>()?;
        let mut values = Vec::with_capacity(self.len() * idx.len());
        for r in 0..self.len() {
            let row = self.row(r);
            values.extend(idx.iter().map(|&c| row[c]));
        }
        Ok(Self {
            timestamps: self.timestamps.clone(),
            columns: names.iter().map(|&n| n.into()).collect(),
            values,
        })
    }

    /// Appends `other` below this table. Column lists must match and the
    /// combined timestamps must stay increasing.
    pub fn concat(&self, other: &Self) -> Result<Self, DataError> {
        if self.columns != other.columns {
            return Err(DataError::ShapeMismatch {
                expected: self.columns.len(),
                found: other.columns.len(),
            });
        }
        let mut timestamps = self.timestamps.clone();
        timestamps.extend_from_slice(&other.timestamps);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::new(timestamps, self.columns.clone(), values)
    }

    pub(crate) fn from_parts_unchecked(
        timestamps: Vec<HourStamp>,
        columns: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Self {
        debug_assert_eq!(values.len(), timestamps.len() * columns.len());
        Self { timestamps, columns, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|&n| n.into()).collect()
    }

    #[test]
    fn rejects_disordered_timestamps() {
        let err = TimeSeriesTable::from_dense(
            vec![HourStamp(0), HourStamp(2), HourStamp(1)],
            cols(&["a"]),
            vec![1.0, 2.0, 3.0],
        )
        .unwrap_err();
        assert_eq!(err, DataError::TimestampDisorder { row: 2 });
    }

    #[test]
    fn rejects_wrong_value_count() {
        let err = TimeSeriesTable::from_dense(vec![HourStamp(0)], cols(&["a", "b"]), vec![1.0])
            .unwrap_err();
        assert_eq!(err, DataError::ShapeMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn column_access() {
        let t = TimeSeriesTable::new(
            vec![HourStamp(0), HourStamp(1)],
            cols(&["a", "b"]),
            vec![Some(1.0), None, Some(3.0), Some(4.0)],
        )
        .unwrap();
        assert_eq!(t.column(1).collect::<Vec<_>>(), vec![None, Some(4.0)]);
        assert_eq!(t.dense_column(0).unwrap(), vec![1.0, 3.0]);
        assert!(matches!(t.dense_column(1), Err(DataError::MissingValues { .. })));
        assert_eq!(t.missing_count(), 1);
        let s = t.select_columns(&["b", "a"]).unwrap();
        assert_eq!(s.row(1), &[Some(4.0), Some(3.0)]);
    }
}
