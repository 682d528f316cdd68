//! Quick invariant checks behind `metaforecast selftest`.

use chrono::NaiveDate;
use metaforecast_core::arima::{difference, inverse_difference};
use metaforecast_core::data::{clean_missing, make_windows};
use metaforecast_core::metaheuristics::Algorithm;
use metaforecast_core::neural::{from_bytes, to_bytes};
use metaforecast_core::{
    Assignment, FillPolicy, Layout, Network, NetworkKind, NetworkSpec, OptimizerConfig, ParamSpec, ScaleDirection,
    Scaler, SearchSpace,
};

use crate::synth::{generate, punch_holes, SyntheticSpec};

type Check = Result<String, String>;

/// Runs every check, reporting one line each through `log`. Returns true
/// when all pass.
pub fn run(mut log: impl FnMut(String)) -> bool {
    let checks: [(&str, fn() -> Check); 6] = [
        ("window count", windows),
        ("scaler round trip", scaler),
        ("cleaning is idempotent", cleaning),
        ("differencing round trip", differencing),
        ("analytic gradients", gradients),
        ("optimizer traces", optimizers),
    ];
    let mut all = true;
    for (name, check) in checks {
        match check() {
            Ok(detail) => log(format!("[ok]   {name}: {detail}")),
            Err(detail) => {
                all = false;
                log(format!("[FAIL] {name}: {detail}"));
            }
        }
    }
    all
}

fn table(days: usize) -> metaforecast_core::TimeSeriesTable {
    let spec = SyntheticSpec { days, ..SyntheticSpec::default() };
    generate(&spec, NaiveDate::from_ymd_opt(2012, 3, 1).unwrap(), 7)
}

fn windows() -> Check {
    let t = table(3);
    for (lookback, horizon) in [(1, 1), (24, 24), (5, 40)] {
        let w = make_windows(&t, "temperature", lookback, horizon, Layout::Flat).map_err(|e| e.to_string())?;
        let expected = t.len() - lookback - horizon + 1;
        if w.len() != expected {
            return Err(format!("L={lookback} H={horizon}: {} windows, expected {expected}", w.len()));
        }
    }
    Ok(format!("{} rows", t.len()))
}

fn scaler() -> Check {
    let t = table(4);
    let s = Scaler::fit(&t).map_err(|e| e.to_string())?;
    let scaled = s.apply(&t, ScaleDirection::Forward).map_err(|e| e.to_string())?;
    let back = s.apply(&scaled, ScaleDirection::Inverse).map_err(|e| e.to_string())?;
    let worst = t
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a.unwrap() - b.unwrap()).abs())
        .fold(0.0, f64::max);
    if worst > 1e-9 {
        return Err(format!("max error {worst:e}"));
    }
    Ok(format!("max error {worst:.1e}"))
}

fn cleaning() -> Check {
    let t = punch_holes(&table(2), "temperature", 0.2, 3);
    let t = punch_holes(&t, "precipitation", 0.8, 4);
    let once = clean_missing(&t, 0.5, FillPolicy::ForwardFill).map_err(|e| e.to_string())?;
    let twice = clean_missing(&once, 0.5, FillPolicy::ForwardFill).map_err(|e| e.to_string())?;
    if once != twice || once.missing_count() != 0 {
        return Err("second pass changed the table".into());
    }
    Ok(format!("{} of {} columns kept", once.num_columns(), t.num_columns()))
}

fn differencing() -> Check {
    let t = table(2);
    let series = t.dense_column(t.column_index("temperature").unwrap()).map_err(|e| e.to_string())?;
    for d in 0..=3 {
        let (diffed, seeds) = difference(&series, d).map_err(|e| e.to_string())?;
        let back = inverse_difference(&diffed, &seeds).map_err(|e| e.to_string())?;
        let worst = series.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if back.len() != series.len() || worst > 1e-8 {
            return Err(format!("d={d}: max error {worst:e}"));
        }
    }
    Ok("d = 0..3".into())
}

fn gradients() -> Check {
    let (features, lookback, horizon) = (3, 3, 2);
    let specs = [
        NetworkSpec::with_widths(NetworkKind::Ann, features, lookback, horizon, vec![5]),
        NetworkSpec::with_widths(NetworkKind::Lstm, features, lookback, horizon, vec![4, 3]),
        NetworkSpec::with_widths(NetworkKind::Gru, features, lookback, horizon, vec![4, 3]),
    ];
    let input_width = features * lookback;
    let inputs: Vec<Vec<f64>> =
        (0..2).map(|b| (0..input_width).map(|i| ((i * 7 + b * 3) as f64 * 0.37).sin()).collect()).collect();
    let targets: Vec<Vec<f64>> = (0..2).map(|b| (0..horizon).map(|h| (b + h) as f64 * 0.3 - 0.2).collect()).collect();
    let xs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
    let ys: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
    let mut worst = 0.0f64;
    for spec in &specs {
        let mut net = Network::initialize(spec, 11).map_err(|e| e.to_string())?;
        let (_, grad) = net.loss_and_gradient(&xs, &ys).map_err(|e| e.to_string())?;
        let step = 1e-5;
        for k in 0..grad.len() {
            let original = net.parameters().as_flat()[k];
            net.parameters_mut().as_flat_mut()[k] = original + step;
            let up = net.loss_and_gradient(&xs, &ys).map_err(|e| e.to_string())?.0;
            net.parameters_mut().as_flat_mut()[k] = original - step;
            let down = net.loss_and_gradient(&xs, &ys).map_err(|e| e.to_string())?.0;
            net.parameters_mut().as_flat_mut()[k] = original;
            let numeric = (up - down) / (2.0 * step);
            let rel = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-6);
            worst = worst.max(rel);
        }
        let copy = from_bytes(&to_bytes(&net)).map_err(|e| e.to_string())?;
        if copy != net {
            return Err(format!("{:?} blob round trip changed the network", spec.kind));
        }
    }
    if worst > 1e-4 {
        return Err(format!("worst relative error {worst:e}"));
    }
    Ok(format!("worst relative error {worst:.1e}"))
}

fn optimizers() -> Check {
    let space = SearchSpace::new(vec![
        ParamSpec::continuous("x", -5.0, 5.0).unwrap(),
        ParamSpec::log_continuous("y", 1e-3, 1.0).unwrap(),
        ParamSpec::integer("n", 0, 9).unwrap(),
    ])
    .map_err(|e| e.to_string())?;
    let objective = |a: &Assignment| {
        let x = a.real("x").unwrap();
        let y = a.real("y").unwrap().log10() + 1.5;
        let n = a.integer("n").unwrap() as f64 - 4.0;
        x * x + y * y + n * n
    };
    let config = OptimizerConfig { population_size: 8, generations: 12, seed: 5, ..OptimizerConfig::default() };
    let mut best = Vec::new();
    for algorithm in [Algorithm::Genetic, Algorithm::DifferentialEvolution, Algorithm::ParticleSwarm] {
        let r = algorithm.optimize(&space, &objective, &config).map_err(|e| e.to_string())?;
        if r.trace.len() != config.generations + 1 || r.trace.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("{algorithm:?}: trace is not monotone"));
        }
        if r.history.iter().any(|e| !space.contains(&e.position)) {
            return Err(format!("{algorithm:?}: evaluated a point outside the bounds"));
        }
        best.push(format!("{:.3}", r.best_fitness));
    }
    Ok(format!("best GA/DE/PSO {}", best.join("/")))
}
