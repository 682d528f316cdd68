//! Hourly weather CSV: `date,time,temperature,dew_point,relative_humidity,
//! wind_speed,visibility,pressure,precipitation`.
//!
//! `date` is `YYYY-MM-DD`, `time` an hour 0-23 (`HH:MM` is accepted too).
//! An empty or unparseable value cell is a missing observation.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use metaforecast_core::data::{DataError, HourStamp, TimeSeriesTable};

use crate::error::{HarnessError, Result};

/// Value columns in file order. `hour` is derived from `time`.
pub const VALUE_COLUMNS: [&str; 7] =
    ["temperature", "dew_point", "relative_humidity", "wind_speed", "visibility", "pressure", "precipitation"];

/// Feature columns of a loaded table: hour of day plus the value columns.
pub fn feature_columns() -> Vec<String> {
    std::iter::once("hour").chain(VALUE_COLUMNS).map(String::from).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Insert all-missing rows for absent hours instead of rejecting the file.
    pub fill_time_gaps: bool,
}

pub fn stamp(date: NaiveDate, hour: u32) -> HourStamp {
    let days = date.signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()).num_days();
    HourStamp(days * 24 + hour as i64)
}

pub fn date_of(stamp: HourStamp) -> (NaiveDate, u32) {
    let days = stamp.0.div_euclid(24);
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
    (epoch + chrono::TimeDelta::days(days), stamp.0.rem_euclid(24) as u32)
}

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

fn parse_hour(text: &str) -> Option<u32> {
    let t = text.trim();
    let hour = match t.split_once(':') {
        Some((h, m)) if m.parse::<u32>().ok()? == 0 => h.parse().ok()?,
        Some(_) => return None,
        None => t.parse().ok()?,
    };
    (hour < 24).then_some(hour)
}

pub fn load_weather_csv(path: &Path, options: LoadOptions) -> Result<TimeSeriesTable> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
    read_weather_csv(file, path, options)
}

pub fn read_weather_csv(reader: impl std::io::Read, path: &Path, options: LoadOptions) -> Result<TimeSeriesTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let parse_err = |line: u64, message: String| HarnessError::Parse { path: path.into(), line, message };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::MissingColumn(name.into()).into())
    };
    let date_col = find("date")?;
    let time_col = find("time")?;
    let value_cols = VALUE_COLUMNS.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    let width = VALUE_COLUMNS.len() + 1;

    let mut timestamps = Vec::new();
    let mut values: Vec<Option<f64>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let date = parse_date(cell(date_col)).ok_or_else(|| parse_err(line, format!("bad date `{}`", cell(date_col))))?;
        let hour = parse_hour(cell(time_col)).ok_or_else(|| parse_err(line, format!("bad time `{}`", cell(time_col))))?;
        let ts = stamp(date, hour);
        if let Some(&prev) = timestamps.last() {
            if ts <= prev {
                return Err(DataError::TimestampDisorder { row: timestamps.len() }.into());
            }
            if ts != HourStamp::next(prev) {
                if !options.fill_time_gaps {
                    return Err(parse_err(line, format!("{} hour(s) missing before this row", ts.0 - prev.0 - 1)));
                }
                let mut gap = HourStamp::next(prev);
                while gap < ts {
                    timestamps.push(gap);
                    values.push(Some(date_of(gap).1 as f64));
                    values.extend(std::iter::repeat_n(None, width - 1));
                    gap = gap.next();
                }
            }
        }
        timestamps.push(ts);
        values.push(Some(hour as f64));
        values.extend(value_cols.iter().map(|&c| cell(c).parse::<f64>().ok().filter(|v| v.is_finite())));
    }
    if timestamps.is_empty() {
        return Err(DataError::EmptyTable.into());
    }
    Ok(TimeSeriesTable::new(timestamps, feature_columns(), values)?)
}

fn format_value(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Writes `table` in the same layout: date, time, then every column except
/// `hour`. Missing cells are left blank.
pub fn write_table_csv(table: &TimeSeriesTable, path: &Path) -> Result<()> {
    let write_err = |e: std::io::Error| HarnessError::Write { path: path.into(), source: e };
    let mut w = csv::Writer::from_path(path).map_err(|e| write_err(e.into()))?;
    let keep: Vec<usize> = (0..table.num_columns()).filter(|&c| table.columns()[c] != "hour").collect();
    let mut header = vec!["date".to_string(), "time".to_string()];
    header.extend(keep.iter().map(|&c| table.columns()[c].clone()));
    w.write_record(&header).map_err(|e| write_err(e.into()))?;
    for (r, &ts) in table.timestamps().iter().enumerate() {
        let (date, hour) = date_of(ts);
        let mut row = vec![format!("{:04}-{:02}-{:02}", date.year(), date.month(), date.day()), hour.to_string()];
        row.extend(keep.iter().map(|&c| format_value(table.get(r, c))));
        w.write_record(&row).map_err(|e| write_err(e.into()))?;
    }
    w.flush().map_err(write_err)
}

/// Formats an hour stamp as `YYYY-MM-DD HH:00`.
pub fn format_stamp(ts: HourStamp) -> String {
    let (date, hour) = date_of(ts);
    format!("{} {hour:02}:00", date.format("%Y-%m-%d"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "date,time,temperature,dew_point,relative_humidity,wind_speed,visibility,pressure,precipitation\n";

    fn load(body: &str, options: LoadOptions) -> Result<TimeSeriesTable> {
        read_weather_csv(format!("{HEADER}{body}").as_bytes(), Path::new("test.csv"), options)
    }

    #[test]
    fn three_full_rows() {
        let t = load(
            "2010-01-01,0,1.5,-2,80,10,25,101.2,0\n2010-01-01,1,1.2,-2.1,81,12,25,101.1,0\n2010-01-01,2,0.9,-2.3,83,9,24.1,101.0,0.2\n",
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.num_columns(), 8);
        assert_eq!(t.missing_count(), 0);
        assert_eq!(t.get(2, 0), Some(2.0));
        assert_eq!(t.get(2, 1), Some(0.9));
    }

    #[test]
    fn blank_cell_is_missing() {
        let t = load("2010-01-01,0,,-2,80,10,25,101.2,0\n2010-01-01,1,1.2,-2.1,81,12,25,101.1,0\n", LoadOptions::default())
            .unwrap();
        assert_eq!(t.missing_count(), 1);
        assert_eq!(t.get(0, t.column_index("temperature").unwrap()), None);
    }

    #[test]
    fn errors() {
        let missing = read_weather_csv("date,time,temperature\n2010-01-01,0,1\n".as_bytes(), Path::new("x"), LoadOptions::default());
        assert!(matches!(missing, Err(HarnessError::Data(DataError::MissingColumn(_)))));
        let disorder = load("2010-01-01,1,1,1,1,1,1,1,1\n2010-01-01,0,1,1,1,1,1,1,1\n", LoadOptions::default());
        assert!(matches!(disorder, Err(HarnessError::Data(DataError::TimestampDisorder { .. }))));
        assert!(matches!(load("", LoadOptions::default()), Err(HarnessError::Data(DataError::EmptyTable))));
        let gap = "2010-01-01,0,1,1,1,1,1,1,1\n2010-01-01,3,1,1,1,1,1,1,1\n";
        assert!(matches!(load(gap, LoadOptions::default()), Err(HarnessError::Parse { line: 3, .. })));
        let filled = load(gap, LoadOptions { fill_time_gaps: true }).unwrap();
        assert_eq!(filled.len(), 4);
        assert_eq!(filled.missing_count(), 14);
        assert_eq!(filled.get(2, 0), Some(2.0));
    }

    #[test]
    fn time_formats_and_stamps() {
        let t = load("2010-01-02,23:00,1,1,1,1,1,1,1\n", LoadOptions::default()).unwrap();
        assert_eq!(t.timestamps()[0], HourStamp(14_611 * 24 + 23));
        assert_eq!(format_stamp(t.timestamps()[0]), "2010-01-02 23:00");
        assert!(load("2010-01-02,24,1,1,1,1,1,1,1\n", LoadOptions::default()).is_err());
    }
}
