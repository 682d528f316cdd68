use alloc::vec;
use alloc::vec::Vec;

use super::cells::{self, GruCache, GruGrads, GruWeights, LstmCache, LstmGrads, LstmWeights};
use super::params::{views, views_mut, Parameters, TensorInfo};
use super::{NetworkKind, NetworkSpec, NeuralError};
use crate::data::WindowedDataset;
use crate::seed;

/// Seed stream used for weight initialization.
pub(crate) const INIT_STREAM: u64 = 0x1417;

/// A forecaster: a spec plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    params: Parameters,
}

enum Trace {
    Ann(Vec<Vec<f64>>),
    Lstm { proj: Vec<Vec<f64>>, steps: Vec<LstmCache>, last: Vec<f64> },
    Gru { proj: Vec<Vec<f64>>, steps: Vec<GruCache>, last: Vec<f64> },
}

fn relu_in_place(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

fn lstm_weights<'a>(v: &[&'a [f64]]) -> LstmWeights<'a> {
    LstmWeights {
        input: v[2],
        input_bias: v[3],
        forget: v[4],
        forget_bias: v[5],
        output: v[6],
        output_bias: v[7],
        candidate: v[8],
        candidate_bias: v[9],
    }
}

fn gru_weights<'a>(v: &[&'a [f64]]) -> GruWeights<'a> {
    GruWeights {
        update: v[2],
        update_bias: v[3],
        reset: v[4],
        reset_bias: v[5],
        candidate: v[6],
        candidate_bias: v[7],
    }
}

/// Weight and bias gradient slices of the dense layer whose weight tensor
/// sits at `index` in the layout.
fn dense_grads<'g>(grad: &'g mut [f64], layout: &[TensorInfo], index: usize) -> (&'g mut [f64], &'g mut [f64]) {
    let (w, b) = (&layout[index], &layout[index + 1]);
    grad[w.offset..b.offset + b.len()].split_at_mut(w.len())
}

impl Network {
    pub fn new(params: Parameters) -> Self {
        Self { params }
    }

    /// Glorot-initialized network; the same `seed` always gives the same weights.
    pub fn initialize(spec: &NetworkSpec, seed: u64) -> Result<Self, NeuralError> {
        let mut rng = seed::rng(seed::derive(seed, INIT_STREAM));
        Ok(Self::new(Parameters::glorot(spec, &mut rng)?))
    }

    pub fn spec(&self) -> &NetworkSpec {
        self.params.spec()
    }

    pub fn parameters(&self) -> &Parameters {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut Parameters {
        &mut self.params
    }

    pub fn into_parameters(self) -> Parameters {
        self.params
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NeuralError> {
        let expected = self.spec().input_width();
        if input.len() != expected {
            return Err(NeuralError::ShapeMismatch { expected, found: input.len() });
        }
        Ok(())
    }

    /// Forecast for one window laid out as `lookback` rows of `features`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.check_input(input)?;
        let v = views(self.params.layout(), self.params.as_flat());
        Ok(self.forward_traced(&v, input).0)
    }

    fn forward_traced(&self, v: &[&[f64]], input: &[f64]) -> (Vec<f64>, Trace) {
        let spec = self.spec();
        let n = v.len();
        let (head_w, head_b) = (v[n - 2], v[n - 1]);
        let mut out = vec![0.0; spec.horizon];
        match spec.kind {
            NetworkKind::Ann => {
                let mut acts = vec![input.to_vec()];
                for layer in 0..spec.widths.len() {
                    let mut a = vec![0.0; spec.widths[layer]];
                    cells::affine(v[2 * layer], v[2 * layer + 1], acts.last().unwrap(), &mut a);
                    relu_in_place(&mut a);
                    acts.push(a);
                }
                cells::affine(head_w, head_b, acts.last().unwrap(), &mut out);
                (out, Trace::Ann(acts))
            }
            NetworkKind::Lstm | NetworkKind::Gru => {
                let (width, hidden) = (spec.widths[0], spec.widths[1]);
                let proj: Vec<Vec<f64>> = input
                    .chunks(spec.features)
                    .map(|x| {
                        let mut p = vec![0.0; width];
                        cells::affine(v[0], v[1], x, &mut p);
                        relu_in_place(&mut p);
                        p
                    })
                    .collect();
                let mut h = vec![0.0; hidden];
                let trace = if spec.kind == NetworkKind::Lstm {
                    let w = lstm_weights(v);
                    let mut c = vec![0.0; hidden];
                    let mut steps = Vec::with_capacity(proj.len());
                    for p in &proj {
                        let s = cells::lstm_cell(p, &h, &c, &w).expect("layout fixes the cell shapes");
                        h = s.h;
                        c = s.c;
                        steps.push(s.cache);
                    }
                    Trace::Lstm { proj, steps, last: h.clone() }
                } else {
                    let w = gru_weights(v);
                    let mut steps = Vec::with_capacity(proj.len());
                    for p in &proj {
                        let s = cells::gru_cell(p, &h, &w).expect("layout fixes the cell shapes");
                        h = s.h;
                        steps.push(s.cache);
                    }
                    Trace::Gru { proj, steps, last: h.clone() }
                };
                cells::affine(head_w, head_b, &h, &mut out);
                (out, trace)
            }
        }
    }

    /// Adds the gradient of `dot(d_out, output)` for one sample to `grad`.
    fn backward(&self, v: &[&[f64]], input: &[f64], trace: &Trace, d_out: &[f64], grad: &mut [f64]) {
        let layout = self.params.layout();
        let n = layout.len();
        let head_w = v[n - 2];
        let last = match trace {
            Trace::Ann(acts) => acts.last().unwrap(),
            Trace::Lstm { last, .. } | Trace::Gru { last, .. } => last,
        };
        {
            let (gw, gb) = dense_grads(grad, layout, n - 2);
            cells::accumulate(gw, gb, d_out, last);
        }
        let mut d_last = vec![0.0; last.len()];
        cells::back_input(head_w, d_out, &mut d_last);

        match trace {
            Trace::Ann(acts) => {
                let mut delta = d_last;
                for layer in (0..acts.len() - 1).rev() {
                    let a = &acts[layer + 1];
                    for (d, &x) in delta.iter_mut().zip(a) {
                        if x <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    let (gw, gb) = dense_grads(grad, layout, 2 * layer);
                    cells::accumulate(gw, gb, &delta, &acts[layer]);
                    if layer > 0 {
                        let mut below = vec![0.0; acts[layer].len()];
                        cells::back_input(v[2 * layer], &delta, &mut below);
                        delta = below;
                    }
                }
            }
            Trace::Lstm { proj, steps, .. } => {
                let w = lstm_weights(v);
                let mut dh = d_last;
                let mut dc = vec![0.0; dh.len()];
                for t in (0..steps.len()).rev() {
                    let (dh_prev, dc_prev, dp) = {
                        let gates = &layout[2..10];
                        let region = &mut grad[gates[0].offset..gates[7].offset + gates[7].len()];
                        let mut g = views_mut(gates, region).into_iter();
                        let mut grads = LstmGrads {
                            input: g.next().unwrap(),
                            input_bias: g.next().unwrap(),
                            forget: g.next().unwrap(),
                            forget_bias: g.next().unwrap(),
                            output: g.next().unwrap(),
                            output_bias: g.next().unwrap(),
                            candidate: g.next().unwrap(),
                            candidate_bias: g.next().unwrap(),
                        };
                        cells::lstm_backward(&steps[t], &w, &dh, &dc, &mut grads)
                    };
                    self.projection_backward(grad, &proj[t], dp, &input[t * self.spec().features..]);
                    dh = dh_prev;
                    dc = dc_prev;
                }
            }
            Trace::Gru { proj, steps, .. } => {
                let w = gru_weights(v);
                let mut dh = d_last;
                for t in (0..steps.len()).rev() {
                    let (dh_prev, dp) = {
                        let gates = &layout[2..8];
                        let region = &mut grad[gates[0].offset..gates[5].offset + gates[5].len()];
                        let mut g = views_mut(gates, region).into_iter();
                        let mut grads = GruGrads {
                            update: g.next().unwrap(),
                            update_bias: g.next().unwrap(),
                            reset: g.next().unwrap(),
                            reset_bias: g.next().unwrap(),
                            candidate: g.next().unwrap(),
                            candidate_bias: g.next().unwrap(),
                        };
                        cells::gru_backward(&steps[t], &w, &dh, &mut grads)
                    };
                    self.projection_backward(grad, &proj[t], dp, &input[t * self.spec().features..]);
                    dh = dh_prev;
                }
            }
        }
    }

    fn projection_backward(&self, grad: &mut [f64], proj: &[f64], mut dp: Vec<f64>, x_tail: &[f64]) {
        for (d, &p) in dp.iter_mut().zip(proj) {
            if p <= 0.0 {
                *d = 0.0;
            }
        }
        let x = &x_tail[..self.spec().features];
        let (gw, gb) = dense_grads(grad, self.params.layout(), 0);
        cells::accumulate(gw, gb, &dp, x);
    }

    /// Mean squared error over every sample and output, and its gradient
    /// with respect to the flat parameter vector.
    pub fn loss_and_gradient(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> Result<(f64, Vec<f64>), NeuralError> {
        if inputs.is_empty() {
            return Err(NeuralError::EmptyBatch);
        }
        if inputs.len() != targets.len() {
            return Err(NeuralError::ShapeMismatch { expected: inputs.len(), found: targets.len() });
        }
        let horizon = self.spec().horizon;
        let scale = 1.0 / (inputs.len() * horizon) as f64;
        let v = views(self.params.layout(), self.params.as_flat());
        let mut grad = vec![0.0; self.params.len()];
        let mut sum = 0.0;
        let mut d_out = vec![0.0; horizon];
        for (x, t) in inputs.iter().zip(targets) {
            self.check_input(x)?;
            if t.len() != horizon {
                return Err(NeuralError::ShapeMismatch { expected: horizon, found: t.len() });
            }
            let (y, trace) = self.forward_traced(&v, x);
            for k in 0..horizon {
                let e = y[k] - t[k];
                sum += e * e;
                d_out[k] = 2.0 * e * scale;
            }
            self.backward(&v, x, &trace, &d_out, &mut grad);
        }
        let loss = sum * scale;
        if !loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss);
        }
        Ok((loss, grad))
    }

    /// Forecasts for `inputs`, a row-major buffer of whole windows.
    /// Returns a row-major `(windows, horizon)` buffer.
    pub fn predict(&self, inputs: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let width = self.spec().input_width();
        if inputs.len() % width != 0 {
            return Err(NeuralError::ShapeMismatch { expected: width * (inputs.len() / width + 1), found: inputs.len() });
        }
        let v = views(self.params.layout(), self.params.as_flat());
        let mut out = Vec::with_capacity(inputs.len() / width * self.spec().horizon);
        for x in inputs.chunks(width) {
            out.extend(self.forward_traced(&v, x).0);
        }
        Ok(out)
    }

    fn check_dataset(&self, data: &WindowedDataset) -> Result<(), NeuralError> {
        let spec = self.spec();
        for (expected, found) in [
            (spec.features, data.num_features()),
            (spec.lookback, data.lookback()),
            (spec.horizon, data.horizon()),
        ] {
            if expected != found {
                return Err(NeuralError::ShapeMismatch { expected, found });
            }
        }
        Ok(())
    }

    pub fn predict_dataset(&self, data: &WindowedDataset) -> Result<Vec<f64>, NeuralError> {
        self.check_dataset(data)?;
        self.predict(data.inputs())
    }

    /// Mean squared error of the forecasts over a whole dataset.
    pub fn mse(&self, data: &WindowedDataset) -> Result<f64, NeuralError> {
        if data.is_empty() {
            return Err(NeuralError::EmptyBatch);
        }
        let preds = self.predict_dataset(data)?;
        let sum: f64 = preds.iter().zip(data.targets()).map(|(p, t)| (p - t) * (p - t)).sum();
        Ok(sum / preds.len() as f64)
    }
}
