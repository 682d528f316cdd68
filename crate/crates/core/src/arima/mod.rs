//! ARIMA(p, d, q) estimated by conditional sum of squares.
//!
//! The `d`-times differenced series `w` follows
//! `w_t = c + sum_j ar_j w_{t-j} + e_t + sum_k ma_k e_{t-k}`.
//! Residuals are computed from `t = max(p, q)` onward with earlier residuals
//! fixed at zero. Estimates start from a Hannan-Rissanen regression and are
//! polished with a Nelder-Mead simplex on the CSS objective.

mod difference;
mod nelder_mead;

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub use difference::{difference, integrate, inverse_difference, DifferencingSeeds};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArimaError {
    #[error("series of length {len} is too short; need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("seeds expect {expected} differenced values, got {found}")]
    SeedMismatch { expected: usize, found: usize },
    #[error("least-squares system is singular")]
    DegenerateFit,
    #[error("forecast horizon must be at least 1")]
    InvalidHorizon,
    #[error("series contains non-finite values")]
    NonFiniteInput,
    #[error("coefficient count does not match the order")]
    InvalidParameters,
    #[error("forecast origin {origin} is outside the usable range")]
    InvalidOrigin { origin: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }

    fn lag(&self) -> usize {
        self.p.max(self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub include_intercept: bool,
    /// Differenced observations required per estimated coefficient.
    pub min_obs_per_param: usize,
    /// Simplex iteration cap; `None` scales with the parameter count.
    pub max_iterations: Option<usize>,
    pub tolerance: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { include_intercept: true, min_obs_per_param: 10, max_iterations: None, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    order: ArimaOrder,
    intercept: f64,
    ar: Vec<f64>,
    ma: Vec<f64>,
    noise_variance: f64,
    css: f64,
    initial_css: f64,
    seeds: DifferencingSeeds,
    last_levels: Vec<f64>,
    differenced_tail: Vec<f64>,
    residual_tail: Vec<f64>,
    converged: bool,
    iterations: usize,
}

impl ArimaModel {
    /// Builds a model with fixed coefficients, conditioning its state on
    /// `series` (original units).
    pub fn with_parameters(
        order: ArimaOrder,
        intercept: f64,
        ar: Vec<f64>,
        ma: Vec<f64>,
        series: &[f64],
    ) -> Result<Self, ArimaError> {
        if ar.len() != order.p || ma.len() != order.q {
            return Err(ArimaError::InvalidParameters);
        }
        if series.iter().any(|x| !x.is_finite()) {
            return Err(ArimaError::NonFiniteInput);
        }
        let (w, seeds) = difference(series, order.d)?;
        let mut residuals = Vec::new();
        let css = css(&w, intercept, &ar, &ma, order.lag(), &mut residuals);
        let effective = w.len().saturating_sub(order.lag());
        let dof = effective.saturating_sub(order.p + order.q + 1).max(1);
        Ok(Self {
            order,
            intercept,
            noise_variance: css / dof as f64,
            css,
            initial_css: css,
            last_levels: difference::last_levels(series, order.d),
            differenced_tail: tail(&w, order.p),
            residual_tail: tail(&residuals, order.q),
            ar,
            ma,
            seeds,
            converged: true,
            iterations: 0,
        })
    }

    pub fn order(&self) -> ArimaOrder {
        self.order
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn ar_coeffs(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma_coeffs(&self) -> &[f64] {
        &self.ma
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// CSS at the fitted coefficients.
    pub fn css(&self) -> f64 {
        self.css
    }

    /// CSS at the Hannan-Rissanen starting point.
    pub fn initial_css(&self) -> f64 {
        self.initial_css
    }

    pub fn seeds(&self) -> &DifferencingSeeds {
        &self.seeds
    }

    /// False when the simplex hit its iteration cap; the best point found is
    /// still used.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Whether every root of the AR polynomial lies outside the unit circle.
    pub fn is_stationary(&self) -> bool {
        ar_is_stationary(&self.ar)
    }

    /// Multi-step forecast from the end of the fitted series, in original
    /// units. Future innovations are set to zero.
    pub fn forecast(&self, horizon: usize) -> Result<Vec<f64>, ArimaError> {
        if horizon == 0 {
            return Err(ArimaError::InvalidHorizon);
        }
        let w = self.forecast_differenced(&self.differenced_tail, &self.residual_tail, horizon);
        Ok(integrate(&w, &self.last_levels))
    }

    /// One pass over `series` with the fitted coefficients, producing a
    /// `horizon`-step forecast from each origin `first_origin + i`,
    /// `i < count`. The forecast from origin `o` only uses `series[..o]`.
    pub fn rolling_forecasts(
        &self,
        series: &[f64],
        first_origin: usize,
        count: usize,
        horizon: usize,
    ) -> Result<Vec<Vec<f64>>, ArimaError> {
        if horizon == 0 {
            return Err(ArimaError::InvalidHorizon);
        }
        if count == 0 {
            return Ok(Vec::new());
        }
        let d = self.order.d;
        let last_origin = first_origin + count - 1;
        if first_origin <= d {
            return Err(ArimaError::InvalidOrigin { origin: first_origin });
        }
        if last_origin > series.len() {
            return Err(ArimaError::InvalidOrigin { origin: last_origin });
        }
        let known = &series[..last_origin];
        if known.iter().any(|x| !x.is_finite()) {
            return Err(ArimaError::NonFiniteInput);
        }
        let mut levels = Vec::with_capacity(d + 1);
        levels.push(known.to_vec());
        for k in 0..d {
            let next: Vec<f64> = levels[k].windows(2).map(|p| p[1] - p[0]).collect();
            levels.push(next);
        }
        let w = &levels[d];
        let mut residuals = Vec::new();
        css(w, self.intercept, &self.ar, &self.ma, self.order.lag(), &mut residuals);

        let mut out = Vec::with_capacity(count);
        for origin in first_origin..=last_origin {
            let known_w = origin - d;
            let w_tail = tail(&w[..known_w], self.order.p);
            let e_tail = tail(&residuals[..known_w], self.order.q);
            let last: Vec<f64> = (0..d).map(|k| levels[k][origin - 1 - k]).collect();
            let fw = self.forecast_differenced(&w_tail, &e_tail, horizon);
            out.push(integrate(&fw, &last));
        }
        Ok(out)
    }

    fn forecast_differenced(&self, w_tail: &[f64], e_tail: &[f64], horizon: usize) -> Vec<f64> {
        let (p, q) = (self.order.p, self.order.q);
        let mut w = pad_front(w_tail, p);
        let mut e = pad_front(e_tail, q);
        for _ in 0..horizon {
            let mut next = self.intercept;
            for j in 1..=p {
                next += self.ar[j - 1] * w[w.len() - j];
            }
            for k in 1..=q {
                next += self.ma[k - 1] * e[e.len() - k];
            }
            w.push(next);
            e.push(0.0);
        }
        w.split_off(p)
    }
}

/// Fits ARIMA(p, d, q) to `series` by conditional sum of squares.
pub fn fit_arima(series: &[f64], order: ArimaOrder, settings: &FitSettings) -> Result<ArimaModel, ArimaError> {
    if series.iter().any(|x| !x.is_finite()) {
        return Err(ArimaError::NonFiniteInput);
    }
    let (w, _) = difference(series, order.d)?;
    let needed = settings.min_obs_per_param * (order.p + order.q + 1);
    if w.len() < needed || w.len() <= order.lag() + order.p + order.q + 1 {
        return Err(ArimaError::SeriesTooShort { len: w.len(), needed });
    }

    let start = hannan_rissanen(&w, order, settings.include_intercept)?;
    let unpack = |theta: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let (c, rest) = if settings.include_intercept { (theta[0], &theta[1..]) } else { (0.0, theta) };
        (c, rest[..order.p].to_vec(), rest[order.p..].to_vec())
    };
    let objective = |theta: &[f64]| {
        let (c, ar, ma) = unpack(theta);
        let mut scratch = Vec::new();
        css(&w, c, &ar, &ma, order.lag(), &mut scratch)
    };
    let initial_css = objective(&start);

    let (theta, iterations, converged) = if start.is_empty() {
        (start, 0, true)
    } else {
        let settings = nelder_mead::SimplexSettings {
            max_iterations: settings.max_iterations.unwrap_or(500 * start.len()),
            tolerance: settings.tolerance,
            initial_step: 0.1,
        };
        let out = nelder_mead::minimize(objective, &start, &settings);
        (out.point, out.iterations, out.converged)
    };
    let (c, ar, ma) = unpack(&theta);
    let mut model = ArimaModel::with_parameters(order, c, ar, ma, series)?;
    model.initial_css = initial_css;
    model.iterations = iterations;
    model.converged = converged;
    Ok(model)
}

/// Conditional sum of squares; fills `residuals` with one entry per
/// observation of `w` (zeros before `start`).
fn css(w: &[f64], c: f64, ar: &[f64], ma: &[f64], start: usize, residuals: &mut Vec<f64>) -> f64 {
    residuals.clear();
    residuals.resize(w.len(), 0.0);
    let mut sum = 0.0;
    for t in start..w.len() {
        let mut pred = c;
        for (j, a) in ar.iter().enumerate() {
            pred += a * w[t - j - 1];
        }
        for (k, b) in ma.iter().enumerate() {
            pred += b * residuals[t - k - 1];
        }
        let e = w[t] - pred;
        residuals[t] = e;
        sum += e * e;
    }
    if sum.is_finite() { sum } else { f64::INFINITY }
}

/// Two-stage regression estimate: a long autoregression supplies proxy
/// innovations, then `w_t` is regressed on its own lags and lagged proxies.
fn hannan_rissanen(w: &[f64], order: ArimaOrder, intercept: bool) -> Result<Vec<f64>, ArimaError> {
    let n = w.len();
    let ArimaOrder { p, q, .. } = order;
    if p == 0 && q == 0 {
        return Ok(if intercept { vec![w.iter().sum::<f64>() / n as f64] } else { Vec::new() });
    }
    let (proxy, offset) = if q > 0 {
        let long = (20.max(2 * (p + q))).min(n / 3).max(p + q);
        let rows: Vec<usize> = (long..n).collect();
        let coef = least_squares(w, &rows, intercept, |t, out| out.extend((1..=long).map(|j| w[t - j])))?;
        let mut e = vec![0.0; n];
        for &t in &rows {
            let mut pred = if intercept { coef[0] } else { 0.0 };
            let lags = &coef[intercept as usize..];
            for j in 1..=long {
                pred += lags[j - 1] * w[t - j];
            }
            e[t] = w[t] - pred;
        }
        (e, long)
    } else {
        (vec![0.0; n], 0)
    };
    let rows: Vec<usize> = (offset + p.max(q)..n).collect();
    least_squares(w, &rows, intercept, |t, out| {
        out.extend((1..=p).map(|j| w[t - j]));
        out.extend((1..=q).map(|k| proxy[t - k]));
    })
}

/// Ordinary least squares of `w[t]` on the regressors produced by `fill`
/// for each `t` in `rows`, solved through the normal equations.
fn least_squares(
    w: &[f64],
    rows: &[usize],
    intercept: bool,
    fill: impl Fn(usize, &mut Vec<f64>),
) -> Result<Vec<f64>, ArimaError> {
    let mut flat = Vec::new();
    let mut width = 0;
    for &t in rows {
        let before = flat.len();
        if intercept {
            flat.push(1.0);
        }
        fill(t, &mut flat);
        width = flat.len() - before;
    }
    if rows.len() <= width || width == 0 {
        return Err(ArimaError::DegenerateFit);
    }
    let x = DMatrix::from_row_slice(rows.len(), width, &flat);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&t| w[t]));
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let chol = xtx.cholesky().ok_or(ArimaError::DegenerateFit)?;
    let beta = chol.solve(&xty);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(ArimaError::DegenerateFit);
    }
    Ok(beta.iter().copied().collect())
}

/// Step-down (reverse Levinson) test: the AR part is stationary iff every
/// partial autocorrelation has magnitude below one.
pub fn ar_is_stationary(ar: &[f64]) -> bool {
    let mut phi = ar.to_vec();
    while let Some(&kappa) = phi.last() {
        if !(kappa.abs() < 1.0) {
            return false;
        }
        let k = phi.len();
        let denom = 1.0 - kappa * kappa;
        phi = (0..k - 1).map(|j| (phi[j] + kappa * phi[k - 2 - j]) / denom).collect();
    }
    true
}

fn tail(values: &[f64], n: usize) -> Vec<f64> {
    values[values.len().saturating_sub(n)..].to_vec()
}

fn pad_front(values: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n.saturating_sub(values.len())];
    out.extend_from_slice(values);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, s: u64) -> Vec<f64> {
        let mut rng = seed::rng(s);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn constant_model_forecast() {
        let m = ArimaModel::with_parameters(ArimaOrder::new(0, 0, 0), 3.5, vec![], vec![], &[1.0, 2.0]).unwrap();
        assert_eq!(m.forecast(4).unwrap(), vec![3.5; 4]);
        assert_eq!(m.forecast(0).unwrap_err(), ArimaError::InvalidHorizon);
    }

    #[test]
    fn ar1_geometric_decay() {
        let m = ArimaModel::with_parameters(ArimaOrder::new(1, 0, 0), 0.0, vec![0.5], vec![], &[3.0, 8.0]).unwrap();
        assert_eq!(m.forecast(4).unwrap(), vec![4.0, 2.0, 1.0, 0.5]);
    }

    #[test]
    fn random_walk_carries_forward() {
        let m = ArimaModel::with_parameters(ArimaOrder::new(1, 1, 1), 0.0, vec![0.0], vec![0.0], &[1.0, 4.0, 2.5])
            .unwrap();
        assert_eq!(m.forecast(3).unwrap(), vec![2.5; 3]);
    }

    #[test]
    fn white_noise_mean_and_variance() {
        let x: Vec<f64> = noise(2000, 1).into_iter().map(|e| 5.0 + 2.0 * e).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() - 1) as f64;
        let m = fit_arima(&x, ArimaOrder::new(0, 0, 0), &FitSettings::default()).unwrap();
        assert!((m.intercept() - mean).abs() < 1e-12);
        assert!((m.noise_variance() - var).abs() / var < 0.1);
    }

    #[test]
    fn too_short_series() {
        let x = noise(30, 2);
        assert!(matches!(
            fit_arima(&x, ArimaOrder::new(2, 0, 2), &FitSettings::default()),
            Err(ArimaError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn constant_series_is_degenerate() {
        let x = vec![1.0; 200];
        assert_eq!(
            fit_arima(&x, ArimaOrder::new(2, 0, 0), &FitSettings::default()).unwrap_err(),
            ArimaError::DegenerateFit
        );
    }

    #[test]
    fn refinement_never_worsens() {
        let e = noise(600, 3);
        let mut x = vec![0.0; 600];
        for t in 2..600 {
            x[t] = 0.4 * x[t - 1] - 0.2 * x[t - 2] + e[t] + 0.3 * e[t - 1];
        }
        for order in [ArimaOrder::new(2, 0, 1), ArimaOrder::new(1, 1, 2), ArimaOrder::new(0, 0, 3)] {
            let m = fit_arima(&x, order, &FitSettings::default()).unwrap();
            assert!(m.css() <= m.initial_css(), "{order:?}");
            assert_eq!(m.ar_coeffs().len(), order.p);
            assert_eq!(m.ma_coeffs().len(), order.q);
            assert!(m.noise_variance() >= 0.0);
        }
    }

    #[test]
    fn stationarity_check() {
        assert!(ar_is_stationary(&[]));
        assert!(ar_is_stationary(&[0.5]));
        assert!(!ar_is_stationary(&[1.2]));
        assert!(ar_is_stationary(&[1.5, -0.75]));
        assert!(!ar_is_stationary(&[0.5, 0.6]));
    }

    #[test]
    fn rolling_matches_refit_state() {
        // the forecast from origin o must equal a model conditioned on series[..o]
        let e = noise(300, 4);
        let x: Vec<f64> = e.iter().scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        }).collect();
        let order = ArimaOrder::new(2, 1, 1);
        let fitted = fit_arima(&x[..200], order, &FitSettings::default()).unwrap();
        let rolled = fitted.rolling_forecasts(&x, 250, 3, 5).unwrap();
        for (i, f) in rolled.iter().enumerate() {
            let origin = 250 + i;
            let at = ArimaModel::with_parameters(
                order,
                fitted.intercept(),
                fitted.ar_coeffs().to_vec(),
                fitted.ma_coeffs().to_vec(),
                &x[..origin],
            )
            .unwrap();
            let direct = at.forecast(5).unwrap();
            for (a, b) in f.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(fitted.rolling_forecasts(&x, 1, 1, 5).is_err());
        assert!(fitted.rolling_forecasts(&x, 300, 2, 5).is_err());
    }

    #[test]
    fn deterministic_fit() {
        let x = noise(500, 5);
        let a = fit_arima(&x, ArimaOrder::new(1, 0, 1), &FitSettings::default()).unwrap();
        let b = fit_arima(&x, ArimaOrder::new(1, 0, 1), &FitSettings::default()).unwrap();
        assert_eq!(a, b);
    }
}
