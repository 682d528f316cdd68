use alloc::vec::Vec;

use super::{DataError, TimeSeriesTable};

/// Whether inputs are viewed as `(samples, lookback, features)` or
/// `(samples, lookback * features)`. Both share the same memory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Sequential,
    Flat,
}

/// Supervised windows cut from a table with stride 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    num_samples: usize,
    lookback: usize,
    num_features: usize,
    horizon: usize,
    layout: Layout,
}

impl WindowedDataset {
    /// Wraps raw row-major buffers.
    pub fn from_parts(
        inputs: Vec<f64>,
        targets: Vec<f64>,
        lookback: usize,
        num_features: usize,
        horizon: usize,
        layout: Layout,
    ) -> Result<Self, DataError> {
        let width = lookback * num_features;
        if width == 0 || horizon == 0 {
            return Err(DataError::InvalidWindow);
        }
        let num_samples = inputs.len() / width;
        if inputs.len() != num_samples * width {
            return Err(DataError::ShapeMismatch { expected: num_samples * width, found: inputs.len() });
        }
        if targets.len() != num_samples * horizon {
            return Err(DataError::ShapeMismatch { expected: num_samples * horizon, found: targets.len() });
        }
        Ok(Self { inputs, targets, num_samples, lookback, num_features, horizon, layout })
    }

    pub fn len(&self) -> usize {
        self.num_samples
    }

    pub fn is_empty(&self) -> bool {
        self.num_samples == 0
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn input_width(&self) -> usize {
        self.lookback * self.num_features
    }

    pub fn input_shape(&self) -> Vec<usize> {
        match self.layout {
            Layout::Sequential => alloc::vec![self.num_samples, self.lookback, self.num_features],
            Layout::Flat => alloc::vec![self.num_samples, self.input_width()],
        }
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let w = self.input_width();
        &self.inputs[i * w..(i + 1) * w]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.horizon..(i + 1) * self.horizon]
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }
}

/// Window `i` takes rows `[i, i + lookback)` of every column as input and
/// rows `[i + lookback, i + lookback + horizon)` of `target_column` as target.
pub fn make_windows(
    table: &TimeSeriesTable,
    target_column: &str,
    lookback: usize,
    horizon: usize,
    layout: Layout,
) -> Result<WindowedDataset, DataError> {
    if lookback == 0 || horizon == 0 {
        return Err(DataError::InvalidWindow);
    }
    let target = table.column_index(target_column)?;
    let len = table.len();
    let needed = lookback + horizon;
    if len < needed {
        return Err(DataError::SeriesTooShort { len, needed });
    }
    let values = table.dense_values()?;
    let width = table.num_columns();
    let num_samples = len - needed + 1;
    let mut inputs = Vec::with_capacity(num_samples * lookback * width);
    let mut targets = Vec::with_capacity(num_samples * horizon);
    for i in 0..num_samples {
        inputs.extend_from_slice(&values[i * width..(i + lookback) * width]);
        targets.extend((i + lookback..i + needed).map(|r| values[r * width + target]));
    }
    Ok(WindowedDataset {
        inputs,
        targets,
        num_samples,
        lookback,
        num_features: width,
        horizon,
        layout,
    })
}
