//! Derivative-free simplex minimizer used to refine CSS estimates.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct SimplexOutcome {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct SimplexSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial_step: f64,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). The starting point is a vertex of the initial simplex, so
/// the returned value never exceeds `f(start)`.
pub(crate) fn minimize(f: impl Fn(&[f64]) -> f64, start: &[f64], settings: &SimplexSettings) -> SimplexOutcome {
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        let step = if v[i].abs() > 1e-8 { settings.initial_step * v[i].abs().max(0.1) } else { settings.initial_step };
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= settings.tolerance * (1.0 + values[0].abs()) && size <= settings.tolerance.sqrt() {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(0.5);
            let v = eval(&c);
            (c, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            values[i] = eval(&simplex[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    SimplexOutcome { point: simplex[best].clone(), iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(rosen, &[-1.2, 1.0], &SimplexSettings { max_iterations: 5000, tolerance: 1e-14, initial_step: 0.1 });
        assert!(out.converged);
        assert!((out.point[0] - 1.0).abs() < 1e-4 && (out.point[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x[0].abs() + 3.0;
        let out = minimize(f, &[0.0], &SimplexSettings { max_iterations: 3, tolerance: 0.0, initial_step: 1.0 });
        assert_eq!(f(&out.point), 3.0);
        assert!(!out.converged);
    }
}
