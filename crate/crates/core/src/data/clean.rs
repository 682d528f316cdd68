use alloc::vec::Vec;

use super::{DataError, TimeSeriesTable};

/// How gaps left after column dropping are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Carry the last observed value forward. A column whose first value is
    /// missing cannot be filled.
    ForwardFill,
    /// Straight line between the neighbouring observations. Leading and
    /// trailing gaps take the nearest observed value.
    #[default]
    LinearInterpolate,
}

/// Drops every column whose missing fraction is at least `drop_threshold`
/// and fills the remaining gaps according to `policy`.
pub fn clean_missing(
    table: &TimeSeriesTable,
    drop_threshold: f64,
    policy: FillPolicy,
) -> Result<TimeSeriesTable, DataError> {
    if !(drop_threshold > 0.0 && drop_threshold <= 1.0) {
        return Err(DataError::InvalidThreshold(drop_threshold));
    }
    if table.is_empty() {
        return Err(DataError::EmptyTable);
    }
    let rows = table.len() as f64;
    let mut kept = Vec::new();
    let mut filled_columns = Vec::new();
    for (c, name) in table.columns().iter().enumerate() {
        let column: Vec<Option<f64>> = table.column(c).collect();
        let missing = column.iter().filter(|v| v.is_none()).count() as f64;
        if missing / rows >= drop_threshold {
            continue;
        }
        let filled = match policy {
            FillPolicy::ForwardFill => forward_fill(&column)
                .ok_or_else(|| DataError::LeadingGapUnfillable { column: name.clone() })?,
            FillPolicy::LinearInterpolate => interpolate(&column),
        };
        kept.push(name.clone());
        filled_columns.push(filled);
    }
    if kept.is_empty() {
        return Err(DataError::AllColumnsDropped);
    }
    let mut values = Vec::with_capacity(table.len() * kept.len());
    for r in 0..table.len() {
        values.extend(filled_columns.iter().map(|col| Some(col[r])));
    }
    Ok(TimeSeriesTable::from_parts_unchecked(table.timestamps().to_vec(), kept, values))
}

fn forward_fill(column: &[Option<f64>]) -> Option<Vec<f64>> {
    let mut last = (*column.first()?)?;
    Some(
        column
            .iter()
            .map(|v| {
                if let Some(x) = v {
                    last = *x;
                }
                last
            })
            .collect(),
    )
}

fn interpolate(column: &[Option<f64>]) -> Vec<f64> {
    let observed: Vec<(usize, f64)> =
        column.iter().enumerate().filter_map(|(i, v)| v.map(|x| (i, x))).collect();
    // callers drop fully-missing columns before we get here
    debug_assert!(!observed.is_empty());
    let mut out = Vec::with_capacity(column.len());
    let mut next = 0;
    for i in 0..column.len() {
        while next < observed.len() && observed[next].0 < i {
            next += 1;
        }
        let value = match (next.checked_sub(1).map(|k| observed[k]), observed.get(next)) {
            (_, Some(&(j, x))) if j == i => x,
            (Some((i0, x0)), Some(&(i1, x1))) => {
                let t = (i - i0) as f64 / (i1 - i0) as f64;
                x0 + t * (x1 - x0)
            }
            (Some((_, x0)), None) => x0,
            (None, Some(&(_, x1))) => x1,
            (None, None) => f64::NAN,
        };
        out.push(value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::HourStamp;
    use alloc::string::String;
    use alloc::vec;

    fn table(columns: &[&str], rows: Vec<Vec<Option<f64>>>) -> TimeSeriesTable {
        let ts = (0..rows.len() as i64).map(HourStamp).collect();
        let names = columns.iter().map(|&c| String::from(c)).collect();
        TimeSeriesTable::new(ts, names, rows.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn interpolates_midpoint() {
        let t = table(&["temp"], vec![vec![Some(10.0)], vec![None], vec![Some(12.0)]]);
        let c = clean_missing(&t, 0.5, FillPolicy::LinearInterpolate).unwrap();
        assert_eq!(c.dense_column(0).unwrap(), vec![10.0, 11.0, 12.0]);
    }

    #[test]
    fn drops_column_over_threshold() {
        let t = table(
            &["a", "precip"],
            vec![
                vec![Some(1.0), None],
                vec![Some(2.0), None],
                vec![Some(3.0), None],
                vec![Some(4.0), Some(0.0)],
                vec![Some(5.0), Some(1.0)],
            ],
        );
        let c = clean_missing(&t, 0.5, FillPolicy::LinearInterpolate).unwrap();
        assert_eq!(c.columns(), &[String::from("a")]);
        assert_eq!(c.missing_count(), 0);
    }

    #[test]
    fn all_columns_dropped() {
        let t = table(&["a"], vec![vec![None], vec![None]]);
        assert_eq!(
            clean_missing(&t, 1.0, FillPolicy::ForwardFill).unwrap_err(),
            DataError::AllColumnsDropped
        );
    }

    #[test]
    fn forward_fill_and_leading_gap() {
        let t = table(&["a"], vec![vec![Some(1.0)], vec![None], vec![None], vec![Some(4.0)]]);
        let c = clean_missing(&t, 0.9, FillPolicy::ForwardFill).unwrap();
        assert_eq!(c.dense_column(0).unwrap(), vec![1.0, 1.0, 1.0, 4.0]);

        let t = table(&["a"], vec![vec![None], vec![Some(2.0)], vec![Some(3.0)]]);
        assert!(matches!(
            clean_missing(&t, 0.9, FillPolicy::ForwardFill),
            Err(DataError::LeadingGapUnfillable { .. })
        ));
        let c = clean_missing(&t, 0.9, FillPolicy::LinearInterpolate).unwrap();
        assert_eq!(c.dense_column(0).unwrap(), vec![2.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_threshold() {
        let t = table(&["a"], vec![vec![Some(1.0)]]);
        assert!(clean_missing(&t, 0.0, FillPolicy::ForwardFill).is_err());
        assert!(clean_missing(&t, 1.5, FillPolicy::ForwardFill).is_err());
    }

    #[test]
    fn idempotent() {
        let t = table(
            &["a", "b"],
            vec![
                vec![Some(1.0), None],
                vec![None, Some(2.0)],
                vec![Some(5.0), None],
                vec![None, Some(-1.0)],
            ],
        );
        for policy in [FillPolicy::LinearInterpolate] {
            let once = clean_missing(&t, 0.6, policy).unwrap();
            let twice = clean_missing(&once, 0.6, policy).unwrap();
            assert_eq!(once, twice);
        }
    }
}
