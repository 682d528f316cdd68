//! Forecast accuracy metrics. Inputs are expected in original units.

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("actuals have {actual} values but predictions have {predicted}")]
    ShapeMismatch { actual: usize, predicted: usize },
    #[error("no values to compare")]
    Empty,
    #[error("every actual value is below the MAPE floor")]
    AllExcluded,
}

/// Default MAPE exclusion floor in original units.
pub const DEFAULT_MAPE_FLOOR: f64 = 0.1;

fn check(actuals: &[f64], predictions: &[f64]) -> Result<(), MetricError> {
    if actuals.len() != predictions.len() {
        return Err(MetricError::ShapeMismatch { actual: actuals.len(), predicted: predictions.len() });
    }
    if actuals.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(actuals: &[f64], predictions: &[f64]) -> Result<f64, MetricError> {
    check(actuals, predictions)?;
    let sum: f64 = actuals.iter().zip(predictions).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(sum / actuals.len() as f64)
}

/// Mean absolute percentage error in percent, skipping actuals with
/// `|actual| < zero_floor`. Returns the percentage and the skipped count.
pub fn mape(actuals: &[f64], predictions: &[f64], zero_floor: f64) -> Result<(f64, usize), MetricError> {
    check(actuals, predictions)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for (&a, &p) in actuals.iter().zip(predictions) {
        if a.abs() < zero_floor {
            continue;
        }
        sum += (a - p).abs() / a.abs();
        counted += 1;
    }
    if counted == 0 {
        return Err(MetricError::AllExcluded);
    }
    Ok((100.0 * sum / counted as f64, actuals.len() - counted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub mape: f64,
    pub sample_count: usize,
    pub excluded_count: usize,
}

impl MetricReport {
    pub fn compute(actuals: &[f64], predictions: &[f64], zero_floor: f64) -> Result<Self, MetricError> {
        let mse = mse(actuals, predictions)?;
        let (mape, excluded_count) = mape(actuals, predictions, zero_floor)?;
        Ok(Self { mse, mape, sample_count: actuals.len(), excluded_count })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(mse(&[], &[]).unwrap_err(), MetricError::Empty);
        assert!(matches!(mse(&[1.0], &[]), Err(MetricError::ShapeMismatch { .. })));
    }

    #[test]
    fn mape_cases() {
        assert_eq!(mape(&[5.0, -3.0], &[5.0, -3.0], 0.1).unwrap(), (0.0, 0));
        let (m, _) = mape(&[10.0], &[11.0], 0.1).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
        let (m, excluded) = mape(&[0.01, 10.0], &[5.0, 11.0], 0.1).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
        assert_eq!(excluded, 1);
        assert_eq!(mape(&[0.0, 0.05], &[1.0, 1.0], 0.1).unwrap_err(), MetricError::AllExcluded);
    }

    #[test]
    fn report_counts() {
        let r = MetricReport::compute(&[0.0, 10.0], &[0.0, 11.0], DEFAULT_MAPE_FLOOR).unwrap();
        assert_eq!(r.sample_count, 2);
        assert_eq!(r.excluded_count, 1);
        assert!((r.mse - 0.5).abs() < 1e-15);
    }
}
