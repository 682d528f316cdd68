//! Hourly multivariate tables and the transforms that turn them into
//! supervised windows: gap filling, date splits, standardization and
//! sliding windows.

mod clean;
mod scaler;
mod split;
mod table;
mod window;

use alloc::string::String;

pub use clean::{clean_missing, FillPolicy};
pub use scaler::{ScaleDirection, Scaler};
pub use split::{split_by_range, HourRange, SplitSpec, Splits};
pub use table::{HourStamp, TimeSeriesTable};
pub use window::{make_windows, Layout, WindowedDataset};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("column `{0}` not present")]
    MissingColumn(String),
    #[error("timestamps not strictly increasing at row {row}")]
    TimestampDisorder { row: usize },
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("table has no rows")]
    EmptyTable,
    #[error("drop threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("every column exceeded the missing-value threshold")]
    AllColumnsDropped,
    #[error("column `{column}` starts with a gap that forward fill cannot close")]
    LeadingGapUnfillable { column: String },
    #[error("column `{column}` still has missing values")]
    MissingValues { column: String },
    #[error("split ranges must be ordered train < validation < test and not overlap")]
    InvalidSplit,
    #[error("{0} split captures no rows")]
    EmptySplit(&'static str),
    #[error("column `{column}` is constant; cannot standardize")]
    ConstantColumn { column: String },
    #[error("series of length {len} is shorter than lookback + horizon = {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("lookback and horizon must both be at least 1")]
    InvalidWindow,
}
