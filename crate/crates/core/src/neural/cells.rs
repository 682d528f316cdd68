//! Layer and cell primitives with their backward passes.

use alloc::vec;
use alloc::vec::Vec;

use super::{sigmoid, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

fn check(expected: usize, found: usize) -> Result<(), NeuralError> {
    if expected != found {
        return Err(NeuralError::ShapeMismatch { expected, found });
    }
    Ok(())
}

/// `out = b + W x` for a row-major `W` with `out.len()` rows.
#[inline]
pub(crate) fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = b[r] + dot(&w[r * cols..(r + 1) * cols], x);
    }
}

/// Dot product with eight independent partial sums, so the compiler can
/// keep several vector lanes busy instead of one serial add chain.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (u, v) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += u[k] * v[k];
        }
    }
    (acc[0] + acc[4]) + (acc[1] + acc[5]) + (acc[2] + acc[6]) + (acc[3] + acc[7]) + tail
}

/// Adds `dy ⊗ x` to the weight gradient and `dy` to the bias gradient.
#[inline]
pub(crate) fn accumulate(gw: &mut [f64], gb: &mut [f64], dy: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &d) in dy.iter().enumerate() {
        gb[r] += d;
        if d == 0.0 {
            continue;
        }
        for (g, &xi) in gw[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *g += d * xi;
        }
    }
}

/// `dx += Wᵀ dy`.
#[inline]
pub(crate) fn back_input(w: &[f64], dy: &[f64], dx: &mut [f64]) {
    let cols = dx.len();
    for (r, &d) in dy.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for (o, &wv) in dx.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
            *o += d * wv;
        }
    }
}

/// `activation(b + W x)`.
pub fn dense_forward(x: &[f64], w: &[f64], b: &[f64], activation: Activation) -> Result<Vec<f64>, NeuralError> {
    let rows = b.len();
    check(rows * x.len(), w.len())?;
    let mut out = vec![0.0; rows];
    affine(w, b, x, &mut out);
    out.iter_mut().for_each(|v| *v = activation.apply(*v));
    Ok(out)
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

/// Borrowed LSTM gate weights; each matrix acts on `[h_prev, x_t]`.
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights<'a> {
    pub input: &'a [f64],
    pub input_bias: &'a [f64],
    pub forget: &'a [f64],
    pub forget_bias: &'a [f64],
    pub output: &'a [f64],
    pub output_bias: &'a [f64],
    pub candidate: &'a [f64],
    pub candidate_bias: &'a [f64],
}

/// Values saved by [`lstm_cell`] for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCache {
    pub concat: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub cache: LstmCache,
}

/// One LSTM step:
/// `i, f, o = σ(W[h, x] + b)`, `g = tanh(W_c[h, x] + b_c)`,
/// `c = f∘c_prev + i∘g`, `h = o∘tanh(c)`.
pub fn lstm_cell(x_t: &[f64], h_prev: &[f64], c_prev: &[f64], w: &LstmWeights<'_>) -> Result<LstmStep, NeuralError> {
    let hidden = h_prev.len();
    check(hidden, c_prev.len())?;
    let cols = hidden + x_t.len();
    for (m, b) in [(w.input, w.input_bias), (w.forget, w.forget_bias), (w.output, w.output_bias), (w.candidate, w.candidate_bias)] {
        check(hidden, b.len())?;
        check(hidden * cols, m.len())?;
    }
    let z = concat(h_prev, x_t);
    let gate = |m: &[f64], b: &[f64], f: fn(f64) -> f64| {
        let mut out = vec![0.0; hidden];
        affine(m, b, &z, &mut out);
        out.iter_mut().for_each(|v| *v = f(*v));
        out
    };
    let i = gate(w.input, w.input_bias, sigmoid);
    let f = gate(w.forget, w.forget_bias, sigmoid);
    let o = gate(w.output, w.output_bias, sigmoid);
    let g = gate(w.candidate, w.candidate_bias, libm::tanh);
    let c: Vec<f64> = (0..hidden).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|&v| libm::tanh(v)).collect();
    let h = (0..hidden).map(|k| o[k] * tanh_c[k]).collect();
    Ok(LstmStep {
        h,
        c,
        cache: LstmCache {
            concat: z,
            input_gate: i,
            forget_gate: f,
            output_gate: o,
            candidate: g,
            c_prev: c_prev.to_vec(),
            tanh_c,
        },
    })
}

/// Gradient slices for the LSTM gates, in the same order as [`LstmWeights`].
pub(crate) struct LstmGrads<'a> {
    pub input: &'a mut [f64],
    pub input_bias: &'a mut [f64],
    pub forget: &'a mut [f64],
    pub forget_bias: &'a mut [f64],
    pub output: &'a mut [f64],
    pub output_bias: &'a mut [f64],
    pub candidate: &'a mut [f64],
    pub candidate_bias: &'a mut [f64],
}

/// Backward through one LSTM step. Takes the gradients flowing into `h`
/// and `c`, accumulates weight gradients and returns `(dh_prev, dc_prev, dx)`.
pub(crate) fn lstm_backward(
    cache: &LstmCache,
    w: &LstmWeights<'_>,
    dh: &[f64],
    dc_next: &[f64],
    g: &mut LstmGrads<'_>,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hidden = dh.len();
    let mut da_i = vec![0.0; hidden];
    let mut da_f = vec![0.0; hidden];
    let mut da_o = vec![0.0; hidden];
    let mut da_g = vec![0.0; hidden];
    let mut dc_prev = vec![0.0; hidden];
    for k in 0..hidden {
        let (i, f, o, gg, tc) = (
            cache.input_gate[k],
            cache.forget_gate[k],
            cache.output_gate[k],
            cache.candidate[k],
            cache.tanh_c[k],
        );
        let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
        da_o[k] = dh[k] * tc * o * (1.0 - o);
        da_i[k] = dc * gg * i * (1.0 - i);
        da_f[k] = dc * cache.c_prev[k] * f * (1.0 - f);
        da_g[k] = dc * i * (1.0 - gg * gg);
        dc_prev[k] = dc * f;
    }
    let z = &cache.concat;
    accumulate(g.input, g.input_bias, &da_i, z);
    accumulate(g.forget, g.forget_bias, &da_f, z);
    accumulate(g.output, g.output_bias, &da_o, z);
    accumulate(g.candidate, g.candidate_bias, &da_g, z);
    let mut dz = vec![0.0; z.len()];
    back_input(w.input, &da_i, &mut dz);
    back_input(w.forget, &da_f, &mut dz);
    back_input(w.output, &da_o, &mut dz);
    back_input(w.candidate, &da_g, &mut dz);
    let dx = dz.split_off(hidden);
    (dz, dc_prev, dx)
}

/// Borrowed GRU weights; gates act on `[h_prev, x_t]`, the candidate on
/// `[r∘h_prev, x_t]`.
#[derive(Debug, Clone, Copy)]
pub struct GruWeights<'a> {
    pub update: &'a [f64],
    pub update_bias: &'a [f64],
    pub reset: &'a [f64],
    pub reset_bias: &'a [f64],
    pub candidate: &'a [f64],
    pub candidate_bias: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruCache {
    pub concat: Vec<f64>,
    pub reset_concat: Vec<f64>,
    pub update_gate: Vec<f64>,
    pub reset_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h_prev: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruStep {
    pub h: Vec<f64>,
    pub cache: GruCache,
}

/// One GRU step:
/// `z = σ(W_z[h, x] + b_z)`, `r = σ(W_r[h, x] + b_r)`,
/// `h̃ = tanh(W[r∘h, x] + b)`, `h_t = (1 - z)∘h + z∘h̃`.
pub fn gru_cell(x_t: &[f64], h_prev: &[f64], w: &GruWeights<'_>) -> Result<GruStep, NeuralError> {
    let hidden = h_prev.len();
    let cols = hidden + x_t.len();
    for (m, b) in [(w.update, w.update_bias), (w.reset, w.reset_bias), (w.candidate, w.candidate_bias)] {
        check(hidden, b.len())?;
        check(hidden * cols, m.len())?;
    }
    let z_in = concat(h_prev, x_t);
    let mut z = vec![0.0; hidden];
    affine(w.update, w.update_bias, &z_in, &mut z);
    z.iter_mut().for_each(|v| *v = sigmoid(*v));
    let mut r = vec![0.0; hidden];
    affine(w.reset, w.reset_bias, &z_in, &mut r);
    r.iter_mut().for_each(|v| *v = sigmoid(*v));
    let mut rh_in = z_in.clone();
    for k in 0..hidden {
        rh_in[k] = r[k] * h_prev[k];
    }
    let mut n = vec![0.0; hidden];
    affine(w.candidate, w.candidate_bias, &rh_in, &mut n);
    n.iter_mut().for_each(|v| *v = libm::tanh(*v));
    let h = (0..hidden).map(|k| (1.0 - z[k]) * h_prev[k] + z[k] * n[k]).collect();
    Ok(GruStep {
        h,
        cache: GruCache {
            concat: z_in,
            reset_concat: rh_in,
            update_gate: z,
            reset_gate: r,
            candidate: n,
            h_prev: h_prev.to_vec(),
        },
    })
}

pub(crate) struct GruGrads<'a> {
    pub update: &'a mut [f64],
    pub update_bias: &'a mut [f64],
    pub reset: &'a mut [f64],
    pub reset_bias: &'a mut [f64],
    pub candidate: &'a mut [f64],
    pub candidate_bias: &'a mut [f64],
}

/// Backward through one GRU step; returns `(dh_prev, dx)`.
pub(crate) fn gru_backward(cache: &GruCache, w: &GruWeights<'_>, dh: &[f64], g: &mut GruGrads<'_>) -> (Vec<f64>, Vec<f64>) {
    let hidden = dh.len();
    let cols = cache.concat.len();
    let mut dh_prev = vec![0.0; hidden];
    let mut da_z = vec![0.0; hidden];
    let mut da_n = vec![0.0; hidden];
    for k in 0..hidden {
        let (z, n, hp) = (cache.update_gate[k], cache.candidate[k], cache.h_prev[k]);
        dh_prev[k] = dh[k] * (1.0 - z);
        da_z[k] = dh[k] * (n - hp) * z * (1.0 - z);
        da_n[k] = dh[k] * z * (1.0 - n * n);
    }
    accumulate(g.candidate, g.candidate_bias, &da_n, &cache.reset_concat);
    let mut d_rh = vec![0.0; cols];
    back_input(w.candidate, &da_n, &mut d_rh);
    let mut da_r = vec![0.0; hidden];
    for k in 0..hidden {
        let r = cache.reset_gate[k];
        dh_prev[k] += d_rh[k] * r;
        da_r[k] = d_rh[k] * cache.h_prev[k] * r * (1.0 - r);
    }
    accumulate(g.update, g.update_bias, &da_z, &cache.concat);
    accumulate(g.reset, g.reset_bias, &da_r, &cache.concat);
    let mut dz_in = vec![0.0; cols];
    back_input(w.update, &da_z, &mut dz_in);
    back_input(w.reset, &da_r, &mut dz_in);
    for k in 0..hidden {
        dh_prev[k] += dz_in[k];
    }
    let dx = (hidden..cols).map(|j| dz_in[j] + d_rh[j]).collect();
    (dh_prev, dx)
}
