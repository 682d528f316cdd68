use alloc::vec::Vec;

use super::ArimaError;

/// First value of every intermediate series removed while differencing,
/// outermost level first, plus the length needed to invert exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencingSeeds {
    pub(crate) firsts: Vec<f64>,
    pub(crate) differenced_len: usize,
}

impl DifferencingSeeds {
    pub fn order(&self) -> usize {
        self.firsts.len()
    }

    pub fn firsts(&self) -> &[f64] {
        &self.firsts
    }
}

/// Applies the first-difference operator `d` times.
pub fn difference(series: &[f64], d: usize) -> Result<(Vec<f64>, DifferencingSeeds), ArimaError> {
    if series.len() <= d {
        return Err(ArimaError::SeriesTooShort { len: series.len(), needed: d + 1 });
    }
    let mut current = series.to_vec();
    let mut firsts = Vec::with_capacity(d);
    for _ in 0..d {
        firsts.push(current[0]);
        current = current.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let differenced_len = current.len();
    Ok((current, DifferencingSeeds { firsts, differenced_len }))
}

/// Undoes [`difference`] by cumulative summation from the stored seeds.
pub fn inverse_difference(differenced: &[f64], seeds: &DifferencingSeeds) -> Result<Vec<f64>, ArimaError> {
    if differenced.len() != seeds.differenced_len {
        return Err(ArimaError::SeedMismatch { expected: seeds.differenced_len, found: differenced.len() });
    }
    let mut current = differenced.to_vec();
    for &first in seeds.firsts.iter().rev() {
        let mut level = Vec::with_capacity(current.len() + 1);
        let mut acc = first;
        level.push(acc);
        for x in current {
            acc += x;
            level.push(acc);
        }
        current = level;
    }
    Ok(current)
}

/// Continues each differencing level from its last observed value so that
/// forecasts of the `d`-times differenced series map back to levels.
/// `last_levels[k]` is the final value of the `k`-times differenced series.
pub fn integrate(forecast: &[f64], last_levels: &[f64]) -> Vec<f64> {
    let mut current = forecast.to_vec();
    for &last in last_levels.iter().rev() {
        let mut acc = last;
        for x in current.iter_mut() {
            acc += *x;
            *x = acc;
        }
    }
    current
}

/// Final value of every differencing level `0..d` of `series`.
pub(crate) fn last_levels(series: &[f64], d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d);
    let mut current = series.to_vec();
    for _ in 0..d {
        out.push(*current.last().expect("series longer than d"));
        current = current.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}
