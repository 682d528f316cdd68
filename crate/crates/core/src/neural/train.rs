use alloc::vec::Vec;
use rand::seq::SliceRandom;

use super::network::Network;
use super::{NetworkSpec, NeuralError};
use crate::data::WindowedDataset;
use crate::seed;

const SHUFFLE_STREAM: u64 = 0x5f1e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Reshuffle the training windows every epoch.
    pub shuffle: bool,
}

impl TrainingConfig {
    pub fn new(learning_rate: f64, batch_size: usize, epochs: usize, seed: u64) -> Self {
        Self { learning_rate, batch_size, epochs, seed, shuffle: true }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::InvalidConfig("learning rate must be finite and non-negative"));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::InvalidConfig("batch size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(NeuralError::InvalidConfig("epochs must be at least 1"));
        }
        Ok(())
    }
}

/// Training and validation MSE measured at the end of every epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossCurve {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

impl LossCurve {
    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    pub fn final_validation(&self) -> Option<f64> {
        self.validation.last().copied()
    }
}

/// Mini-batch SGD on `network` in place: `w <- w - lr * grad` per batch.
///
/// Shuffling is seeded from `config.seed`. Pinned tensors never move.
pub fn sgd_train(
    network: &mut Network,
    train: &WindowedDataset,
    validation: &WindowedDataset,
    config: &TrainingConfig,
) -> Result<LossCurve, NeuralError> {
    config.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    // shape checks up front, before any update
    network.mse(validation)?;
    let pinned: Vec<_> = network.parameters().pinned_ranges().collect();
    let mut rng = seed::rng(seed::derive(config.seed, SHUFFLE_STREAM));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut curve = LossCurve::default();
    let mut inputs = Vec::with_capacity(config.batch_size);
    let mut targets = Vec::with_capacity(config.batch_size);
    for _ in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(config.batch_size) {
            inputs.clear();
            targets.clear();
            for &i in batch {
                inputs.push(train.input(i));
                targets.push(train.target(i));
            }
            let (_, mut grad) = network.loss_and_gradient(&inputs, &targets)?;
            for r in &pinned {
                grad[r.clone()].iter_mut().for_each(|g| *g = 0.0);
            }
            for (w, g) in network.parameters_mut().as_flat_mut().iter_mut().zip(&grad) {
                *w -= config.learning_rate * g;
            }
        }
        let (t, v) = (network.mse(train)?, network.mse(validation)?);
        if !t.is_finite() || !v.is_finite() {
            return Err(NeuralError::NonFiniteLoss);
        }
        curve.train.push(t);
        curve.validation.push(v);
    }
    Ok(curve)
}

/// Initializes a network from `config.seed` and trains it.
pub fn train_network(
    spec: &NetworkSpec,
    train: &WindowedDataset,
    validation: &WindowedDataset,
    config: &TrainingConfig,
) -> Result<(Network, LossCurve), NeuralError> {
    let mut network = Network::initialize(spec, config.seed)?;
    let curve = sgd_train(&mut network, train, validation, config)?;
    Ok((network, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Layout;
    use crate::neural::NetworkKind;
    use alloc::vec;

    fn dataset(n: usize, seed: u64) -> WindowedDataset {
        use rand::Rng;
        let mut rng = seed::rng(seed);
        let inputs: Vec<f64> = (0..n * 6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets: Vec<f64> = inputs.chunks(6).flat_map(|x| [x[0] - x[5], x[2] * 0.5]).collect();
        WindowedDataset::from_parts(inputs, targets, 3, 2, 2, Layout::Sequential).unwrap()
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let spec = NetworkSpec::with_widths(NetworkKind::Gru, 2, 3, 2, vec![4, 5]);
        let data = dataset(20, 1);
        let config = TrainingConfig::new(0.0, 4, 3, 9);
        let (net, curve) = train_network(&spec, &data, &data, &config).unwrap();
        assert_eq!(net, Network::initialize(&spec, 9).unwrap());
        assert_eq!(curve.len(), 3);
        assert!(curve.train.iter().all(|&l| l == curve.train[0]));
    }

    #[test]
    fn training_is_deterministic_and_lowers_loss() {
        let spec = NetworkSpec::with_widths(NetworkKind::Lstm, 2, 3, 2, vec![4, 5]);
        let data = dataset(40, 2);
        let config = TrainingConfig::new(0.1, 8, 15, 4);
        let (a, ca) = train_network(&spec, &data, &data, &config).unwrap();
        let (b, cb) = train_network(&spec, &data, &data, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let start = Network::initialize(&spec, 4).unwrap().mse(&data).unwrap();
        assert!(ca.train[14] < start);
    }

    #[test]
    fn pinned_gru_biases_stay_zero() {
        let mut spec = NetworkSpec::with_widths(NetworkKind::Gru, 2, 3, 2, vec![4, 5]);
        spec.pin_gru_gate_biases = true;
        let data = dataset(20, 3);
        let (net, _) = train_network(&spec, &data, &data, &TrainingConfig::new(0.2, 5, 3, 1)).unwrap();
        let p = net.parameters();
        assert!(p.tensor("gru.update.b").unwrap().iter().all(|&b| b == 0.0));
        assert!(p.tensor("gru.reset.b").unwrap().iter().all(|&b| b == 0.0));
        assert!(p.tensor("gru.candidate.b").unwrap().iter().any(|&b| b != 0.0));
    }

    #[test]
    fn invalid_configs() {
        assert!(TrainingConfig::new(0.1, 0, 1, 0).validate().is_err());
        assert!(TrainingConfig::new(0.1, 1, 0, 0).validate().is_err());
        assert!(TrainingConfig::new(f64::NAN, 1, 1, 0).validate().is_err());
        assert!(TrainingConfig::new(-1.0, 1, 1, 0).validate().is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let spec = NetworkSpec::with_widths(NetworkKind::Ann, 2, 3, 2, vec![]);
        let data = dataset(20, 5);
        let err = train_network(&spec, &data, &data, &TrainingConfig::new(1e6, 4, 50, 1)).unwrap_err();
        assert_eq!(err, NeuralError::NonFiniteLoss);
    }
}
