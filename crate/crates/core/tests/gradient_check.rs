use metaforecast_core::neural::{Network, NetworkKind, NetworkSpec};
use metaforecast_core::seed;
use rand::Rng;

const STEP: f64 = 1e-5;
/// Central differences carry roughly 1e-11 of absolute roundoff at this
/// step, so relative error is measured against at least this magnitude.
const DENOMINATOR_FLOOR: f64 = 1e-6;

struct Batch {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

fn batch(spec: &NetworkSpec, n: usize, seed: u64) -> Batch {
    let mut rng = seed::rng(seed);
    let inputs = (0..n).map(|_| (0..spec.input_width()).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let targets = (0..n).map(|_| (0..spec.horizon).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    Batch { inputs, targets }
}

fn loss(net: &Network, b: &Batch) -> f64 {
    let mut sum = 0.0;
    for (x, t) in b.inputs.iter().zip(&b.targets) {
        let y = net.forward(x).unwrap();
        sum += y.iter().zip(t).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    }
    sum / (b.inputs.len() * net.spec().horizon) as f64
}

/// Largest relative error between the analytic gradient and central
/// differences over the parameter indices in `indices`.
fn max_relative_error(net: &Network, b: &Batch, indices: impl Iterator<Item = usize>) -> (f64, usize) {
    let xs: Vec<&[f64]> = b.inputs.iter().map(Vec::as_slice).collect();
    let ts: Vec<&[f64]> = b.targets.iter().map(Vec::as_slice).collect();
    let (_, grad) = net.loss_and_gradient(&xs, &ts).unwrap();
    let mut probe = net.clone();
    let mut worst = (0.0, 0);
    for i in indices {
        let w = net.parameters().as_flat()[i];
        probe.parameters_mut().as_flat_mut()[i] = w + STEP;
        let up = loss(&probe, b);
        probe.parameters_mut().as_flat_mut()[i] = w - STEP;
        let down = loss(&probe, b);
        probe.parameters_mut().as_flat_mut()[i] = w;
        let numeric = (up - down) / (2.0 * STEP);
        let denom = grad[i].abs().max(numeric.abs()).max(DENOMINATOR_FLOOR);
        let err = (grad[i] - numeric).abs() / denom;
        if err > worst.0 {
            worst = (err, i);
        }
    }
    worst
}

fn kinds() -> [NetworkKind; 3] {
    [NetworkKind::Ann, NetworkKind::Lstm, NetworkKind::Gru]
}

#[test]
fn every_parameter_matches_finite_differences() {
    for kind in kinds() {
        for s in 0..5 {
            let widths = if kind == NetworkKind::Ann { vec![10, 7] } else { vec![6, 8] };
            let spec = NetworkSpec::with_widths(kind, 4, 3, 5, widths);
            let net = Network::initialize(&spec, 100 + s).unwrap();
            let b = batch(&spec, 3, 200 + s);
            let (err, at) = max_relative_error(&net, &b, 0..net.parameters().len());
            println!("{kind:?} seed {s}: {err:.3e} at {at}");
            assert!(err < 1e-5, "{kind:?} seed {s}: relative error {err:e} at parameter {at}");
        }
    }
}

#[test]
fn full_size_networks_match_on_sampled_parameters() {
    for kind in kinds() {
        let spec = if kind == NetworkKind::Ann {
            NetworkSpec::ann(8, 3, 24)
        } else {
            NetworkSpec::recurrent(kind, 8, 3, 24)
        };
        let net = Network::initialize(&spec, 7).unwrap();
        let b = batch(&spec, 2, 8);
        // every tensor is sampled: first, last and a strided sweep
        let mut idx: Vec<usize> = Vec::new();
        for t in net.parameters().layout() {
            let r = t.range();
            idx.extend(r.clone().step_by((t.len() / 6).max(1)));
            idx.push(r.end - 1);
        }
        let (err, at) = max_relative_error(&net, &b, idx.into_iter());
        println!("{kind:?} full size: {err:.3e} at {at}");
        assert!(err < 1e-5, "{kind:?}: relative error {err:e} at parameter {at}");
    }
}
