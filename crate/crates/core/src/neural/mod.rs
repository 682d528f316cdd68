//! Dense, LSTM and GRU forecasters with hand-written backpropagation and
//! plain mini-batch SGD.
//!
//! Every network maps one input window to a `horizon`-long forecast:
//!
//! * ANN: the flattened window goes through ReLU dense layers and a linear
//!   head.
//! * LSTM / GRU: each timestep is projected by a ReLU dense layer, the
//!   sequence is unrolled through one recurrent cell from zero state, and
//!   the final hidden state feeds a linear head.
//!
//! Parameters live in one flat `f64` buffer ([`Parameters`]) whose tensor
//! layout is fixed by the [`NetworkSpec`]; gradients share that layout.

mod blob;
mod cells;
mod network;
mod params;
mod train;

use alloc::vec;
use alloc::vec::Vec;

pub use blob::{from_bytes, to_bytes, BLOB_MAGIC};
pub use cells::{
    dense_forward, gru_cell, lstm_cell, Activation, GruCache, GruStep, GruWeights, LstmCache, LstmStep,
    LstmWeights,
};
pub use network::Network;
pub use params::{Parameters, TensorInfo};
pub use train::{sgd_train, train_network, LossCurve, TrainingConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("loss became non-finite")]
    NonFiniteLoss,
    #[error("invalid network spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("malformed parameter blob: {0}")]
    Blob(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    Ann,
    Lstm,
    Gru,
}

/// Architecture of a forecaster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub kind: NetworkKind,
    /// Features per timestep.
    pub features: usize,
    pub lookback: usize,
    /// Output width.
    pub horizon: usize,
    /// ANN: hidden dense widths. LSTM/GRU: `[projection, recurrent]`.
    pub widths: Vec<usize>,
    /// Keep the GRU update and reset biases at zero.
    pub pin_gru_gate_biases: bool,
}

impl NetworkSpec {
    /// Dense 64 -> 36 -> horizon over the flattened window.
    pub fn ann(features: usize, lookback: usize, horizon: usize) -> Self {
        Self::with_widths(NetworkKind::Ann, features, lookback, horizon, vec![64, 36])
    }

    /// Per-step projection to 36, recurrent width 64, linear head.
    pub fn recurrent(kind: NetworkKind, features: usize, lookback: usize, horizon: usize) -> Self {
        Self::with_widths(kind, features, lookback, horizon, vec![36, 64])
    }

    pub fn with_widths(kind: NetworkKind, features: usize, lookback: usize, horizon: usize, widths: Vec<usize>) -> Self {
        Self { kind, features, lookback, horizon, widths, pin_gru_gate_biases: false }
    }

    pub fn input_width(&self) -> usize {
        self.features * self.lookback
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.features == 0 || self.lookback == 0 || self.horizon == 0 {
            return Err(NeuralError::InvalidSpec("features, lookback and horizon must be positive"));
        }
        if self.widths.iter().any(|&w| w == 0) {
            return Err(NeuralError::InvalidSpec("layer widths must be positive"));
        }
        if self.kind != NetworkKind::Ann && self.widths.len() != 2 {
            return Err(NeuralError::InvalidSpec("recurrent networks take [projection, recurrent] widths"));
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}
