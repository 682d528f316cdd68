use super::{DataError, HourStamp, TimeSeriesTable};

/// Inclusive range of hour stamps. `start > end` denotes an empty range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HourRange {
    pub start: HourStamp,
    pub end: HourStamp,
}

impl HourRange {
    pub fn new(start: HourStamp, end: HourStamp) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, ts: HourStamp) -> bool {
        self.start <= ts && ts <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: HourRange,
    pub validation: HourRange,
    pub test: HourRange,
}

impl SplitSpec {
    pub fn new(train: HourRange, validation: HourRange, test: HourRange) -> Result<Self, DataError> {
        if train.end >= validation.start || validation.end >= test.start {
            return Err(DataError::InvalidSplit);
        }
        Ok(Self { train, validation, test })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: TimeSeriesTable,
    pub validation: TimeSeriesTable,
    pub test: TimeSeriesTable,
}

/// Assigns each row to the split whose range contains its timestamp. Rows
/// outside every range are discarded.
pub fn split_by_range(table: &TimeSeriesTable, spec: &SplitSpec) -> Result<Splits, DataError> {
    let pick = |range: HourRange, name: &'static str| {
        let part = table.filter_rows(|_, ts| range.contains(ts));
        if part.is_empty() {
            Err(DataError::EmptySplit(name))
        } else {
            Ok(part)
        }
    };
    Ok(Splits {
        train: pick(spec.train, "train")?,
        validation: pick(spec.validation, "validation")?,
        test: pick(spec.test, "test")?,
    })
}
