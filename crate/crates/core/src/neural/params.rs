use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use super::{NetworkKind, NetworkSpec, NeuralError};

/// Position of one weight matrix or bias vector inside the flat buffer.
/// Matrices are row-major with `rows` outputs and `cols` inputs; biases
/// have `cols == 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn is_bias(&self) -> bool {
        self.cols == 1
    }
}

pub(crate) fn layout(spec: &NetworkSpec) -> Vec<TensorInfo> {
    let mut out = Vec::new();
    let mut offset = 0;
    let mut push = |name: String, rows: usize, cols: usize| {
        out.push(TensorInfo { name, rows, cols, offset });
        offset += rows * cols;
    };
    let dense = |push: &mut dyn FnMut(String, usize, usize), name: &str, rows: usize, cols: usize| {
        push(format!("{name}.w"), rows, cols);
        push(format!("{name}.b"), rows, 1);
    };
    match spec.kind {
        NetworkKind::Ann => {
            let mut fan_in = spec.input_width();
            for (i, &w) in spec.widths.iter().enumerate() {
                dense(&mut push, &format!("dense{}", i + 1), w, fan_in);
                fan_in = w;
            }
            dense(&mut push, "head", spec.horizon, fan_in);
        }
        NetworkKind::Lstm | NetworkKind::Gru => {
            let (proj, hidden) = (spec.widths[0], spec.widths[1]);
            dense(&mut push, "proj", proj, spec.features);
            let gates: &[&str] = if spec.kind == NetworkKind::Lstm {
                &["lstm.input", "lstm.forget", "lstm.output", "lstm.candidate"]
            } else {
                &["gru.update", "gru.reset", "gru.candidate"]
            };
            for g in gates {
                dense(&mut push, g, hidden, hidden + proj);
            }
            dense(&mut push, "head", spec.horizon, hidden);
        }
    }
    out
}

/// All trainable weights of a network in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    spec: NetworkSpec,
    layout: Vec<TensorInfo>,
    values: Vec<f64>,
}

impl Parameters {
    pub fn zeros(spec: &NetworkSpec) -> Result<Self, NeuralError> {
        spec.validate()?;
        let layout = layout(spec);
        let total = layout.last().map_or(0, |t| t.offset + t.len());
        Ok(Self { spec: spec.clone(), layout, values: alloc::vec![0.0; total] })
    }

    /// Uniform Glorot initialization of weight matrices, zero biases.
    pub fn glorot<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Self, NeuralError> {
        let mut p = Self::zeros(spec)?;
        for t in &p.layout {
            if t.is_bias() {
                continue;
            }
            let limit = libm::sqrt(6.0 / (t.rows + t.cols) as f64);
            for v in &mut p.values[t.range()] {
                *v = rng.random_range(-limit..limit);
            }
        }
        Ok(p)
    }

    pub fn from_flat(spec: &NetworkSpec, values: Vec<f64>) -> Result<Self, NeuralError> {
        let mut p = Self::zeros(spec)?;
        if values.len() != p.values.len() {
            return Err(NeuralError::ShapeMismatch { expected: p.values.len(), found: values.len() });
        }
        p.values = values;
        Ok(p)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layout(&self) -> &[TensorInfo] {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.layout.iter().find(|t| t.name == name).map(|t| &self.values[t.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.layout.iter().find(|t| t.name == name)?.range();
        Some(&mut self.values[range])
    }

    /// Ranges of tensors that training must leave untouched.
    pub(crate) fn pinned_ranges(&self) -> impl Iterator<Item = core::ops::Range<usize>> + '_ {
        let pin = self.spec.kind == NetworkKind::Gru && self.spec.pin_gru_gate_biases;
        self.layout
            .iter()
            .filter(move |t| pin && (t.name == "gru.update.b" || t.name == "gru.reset.b"))
            .map(TensorInfo::range)
    }
}

/// Splits a flat buffer into consecutive slices following `layout`.
pub(crate) fn views<'a>(layout: &[TensorInfo], values: &'a [f64]) -> Vec<&'a [f64]> {
    layout.iter().map(|t| &values[t.range()]).collect()
}

pub(crate) fn views_mut<'a>(layout: &[TensorInfo], mut values: &'a mut [f64]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(layout.len());
    for t in layout {
        let (head, rest) = core::mem::take(&mut values).split_at_mut(t.len());
        out.push(head);
        values = rest;
    }
    out
}
