//! A single-layer LSTM regressor trained by backpropagation through time.
//!
//! One step of the cell, with `x` the input vector and `h`, `c` the hidden
//! and cell states carried from the previous step:
//!
//! ```text
//! i = σ(W_xi x + W_hi h + b_i)      f = σ(W_xf x + W_hf h + b_f)
//! o = σ(W_xo x + W_ho h + b_o)      g = tanh(W_xc x + W_hc h + b_c)
//! c' = f ⊙ c + i ⊙ g                h' = o ⊙ tanh(c')
//! ```
//!
//! A window of `k` inputs runs from zero states and the prediction is
//! `w_out · h_k + b_out`.

mod normalize;
mod train;

pub use normalize::Normalizer;
pub use train::{make_windows, predict_one, train, train_with, SupervisedSet, TrainedLstm};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    /// Features per time step: 1 for the series alone, 2 with `h_t`.
    pub input_dim: usize,
    pub hidden_size: usize,
    /// Window length `k`.
    pub lookback_k: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Global gradient-norm ceiling applied before each update.
    pub grad_clip: f64,
    /// Heavy-ball coefficient; 0 gives plain gradient descent.
    pub momentum: f64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            input_dim: 1,
            hidden_size: 32,
            lookback_k: 10,
            epochs: 300,
            learning_rate: 0.01,
            seed: 0,
            grad_clip: 5.0,
            momentum: 0.9,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_size == 0 || self.lookback_k == 0 {
            return Err(invalid("input_dim, hidden_size and lookback_k must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.grad_clip > 0.0) {
            return Err(invalid(format!("grad_clip {} must be positive", self.grad_clip)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid(format!("momentum {} must be in [0, 1)", self.momentum)));
        }
        Ok(())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        for (r, ur) in u.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (x, vc) in row.iter_mut().zip(v) {
                *x += ur * vc;
            }
        }
    }

    /// `out += M v`.
    fn mul_acc(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (m, x) in row.iter().zip(v) {
                *o += m * x;
            }
        }
    }

    /// `out += Mᵀ u`.
    fn mul_t_acc(&self, u: &[f64], out: &mut [f64]) {
        for (r, ur) in u.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, m) in out.iter_mut().zip(row) {
                *o += m * ur;
            }
        }
    }
}

/// Weights for one gate: input matrix, recurrent matrix, bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub w_x: Matrix,
    pub w_h: Matrix,
    pub b: Vec<f64>,
}

impl Gate {
    fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w_x: Matrix::zeros(hidden, input_dim),
            w_h: Matrix::zeros(hidden, hidden),
            b: vec![0.0; hidden],
        }
    }

    fn pre_activation(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut z = self.b.clone();
        self.w_x.mul_acc(x, &mut z);
        self.w_h.mul_acc(h, &mut z);
        z
    }

    fn accumulate(&mut self, dz: &[f64], x: &[f64], h_prev: &[f64]) {
        self.w_x.add_outer(dz, x);
        self.w_h.add_outer(dz, h_prev);
        for (b, d) in self.b.iter_mut().zip(dz) {
            *b += d;
        }
    }
}

/// All trainable parameters. Gradients use the same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input: Gate,
    pub forget: Gate,
    pub output: Gate,
    pub cell: Gate,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_size: usize) -> Self {
        Self {
            input: Gate::zeros(input_dim, hidden_size),
            forget: Gate::zeros(input_dim, hidden_size),
            output: Gate::zeros(input_dim, hidden_size),
            cell: Gate::zeros(input_dim, hidden_size),
            w_out: vec![0.0; hidden_size],
            b_out: 0.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input.w_x.cols
    }

    pub fn hidden_size(&self) -> usize {
        self.w_out.len()
    }

    fn gates(&self) -> [&Gate; 4] {
        [&self.input, &self.forget, &self.output, &self.cell]
    }

    fn gates_mut(&mut self) -> [&mut Gate; 4] {
        [&mut self.input, &mut self.forget, &mut self.output, &mut self.cell]
    }

    /// Every parameter slice in a fixed order.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(13);
        for g in self.gates() {
            out.push(&g.w_x.data);
            out.push(&g.w_h.data);
            out.push(&g.b);
        }
        out.push(&self.w_out);
        out.push(std::slice::from_ref(&self.b_out));
        out
    }

    /// Mutable twin of [`LstmParams::slices`].
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let Self {
            input,
            forget,
            output,
            cell,
            w_out,
            b_out,
        } = self;
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(13);
        for g in [input, forget, output, cell] {
            out.push(&mut g.w_x.data);
            out.push(&mut g.w_h.data);
            out.push(&mut g.b);
        }
        out.push(w_out);
        out.push(std::slice::from_mut(b_out));
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// Zeroes the input-weight column of `channel` in every gate.
    pub fn zero_input_channel(&mut self, channel: usize) {
        for g in self.gates_mut() {
            for r in 0..g.w_x.rows {
                g.w_x.set(r, channel, 0.0);
            }
        }
    }
}

/// Seeded uniform initialization in `±1/√hidden`, forget bias 1.
///
/// Each tensor, and each input column of the input matrices, draws from its
/// own ChaCha stream. Adding an input channel therefore leaves the weights
/// of the existing channels unchanged.
pub fn init(config: &LstmConfig) -> Result<LstmParams> {
    config.validate()?;
    let (d, n) = (config.input_dim, config.hidden_size);
    let bound = 1.0 / (n as f64).sqrt();
    let uniform = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    let stream = |id: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(id);
        rng
    };
    let mut params = LstmParams::zeros(d, n);
    for (gi, gate) in params.gates_mut().into_iter().enumerate() {
        let base = 1 + 3 * gi as u64;
        for c in 0..d {
            let mut rng = stream((base << 32) | c as u64);
            for r in 0..n {
                gate.w_x.set(r, c, uniform.sample(&mut rng));
            }
        }
        let mut rng = stream((base + 1) << 32);
        gate.w_h.data.iter_mut().for_each(|v| *v = uniform.sample(&mut rng));
        let mut rng = stream((base + 2) << 32);
        gate.b.iter_mut().for_each(|v| *v = uniform.sample(&mut rng));
    }
    params.forget.b.iter_mut().for_each(|b| *b = 1.0);
    let mut rng = stream(13 << 32);
    params.w_out.iter_mut().for_each(|v| *v = uniform.sample(&mut rng));
    params.b_out = uniform.sample(&mut stream(14 << 32));
    Ok(params)
}

/// Activations of one recurrent step.
#[derive(Debug, Clone)]
pub struct Step {
    pub x: Vec<f64>,
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub output: Vec<f64>,
    /// Cell candidate `g`.
    pub candidate: Vec<f64>,
    pub cell: Vec<f64>,
    pub tanh_cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Per-step activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub steps: Vec<Step>,
    pub prediction: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_window(params: &LstmParams, window: &[Vec<f64>]) -> Result<()> {
    if window.is_empty() {
        return Err(invalid("empty input window"));
    }
    let d = params.input_dim();
    if let Some(v) = window.iter().find(|v| v.len() != d) {
        return Err(invalid(format!(
            "input vector of length {} for an LSTM with input_dim {d}",
            v.len()
        )));
    }
    Ok(())
}

/// Runs the window through the cell from zero states.
pub fn forward(params: &LstmParams, window: &[Vec<f64>]) -> Result<ForwardCache> {
    check_window(params, window)?;
    let n = params.hidden_size();
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut steps = Vec::with_capacity(window.len());
    for x in window {
        let input: Vec<f64> = params.input.pre_activation(x, &h).into_iter().map(sigmoid).collect();
        let forget: Vec<f64> = params.forget.pre_activation(x, &h).into_iter().map(sigmoid).collect();
        let output: Vec<f64> = params.output.pre_activation(x, &h).into_iter().map(sigmoid).collect();
        let candidate: Vec<f64> = params.cell.pre_activation(x, &h).into_iter().map(f64::tanh).collect();
        c = (0..n).map(|j| forget[j] * c[j] + input[j] * candidate[j]).collect();
        let tanh_cell: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        h = (0..n).map(|j| output[j] * tanh_cell[j]).collect();
        steps.push(Step {
            x: x.clone(),
            input,
            forget,
            output,
            candidate,
            cell: c.clone(),
            tanh_cell,
            hidden: h.clone(),
        });
    }
    let prediction = params.b_out + params.w_out.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
    Ok(ForwardCache { steps, prediction })
}

/// Gradients of `½ (prediction − target)²` with respect to every parameter.
pub fn backward(params: &LstmParams, cache: &ForwardCache, target: f64) -> LstmParams {
    let n = params.hidden_size();
    let mut grads = LstmParams::zeros(params.input_dim(), n);
    let dp = cache.prediction - target;
    let k = cache.steps.len();
    let last = &cache.steps[k - 1].hidden;
    grads.b_out = dp;
    grads.w_out = last.iter().map(|v| dp * v).collect();

    let zeros = vec![0.0; n];
    let mut dh: Vec<f64> = params.w_out.iter().map(|w| dp * w).collect();
    let mut dc_next = vec![0.0; n];
    for t in (0..k).rev() {
        let s = &cache.steps[t];
        let (c_prev, h_prev) = if t == 0 {
            (&zeros, &zeros)
        } else {
            (&cache.steps[t - 1].cell, &cache.steps[t - 1].hidden)
        };
        let mut dz_i = vec![0.0; n];
        let mut dz_f = vec![0.0; n];
        let mut dz_o = vec![0.0; n];
        let mut dz_g = vec![0.0; n];
        for j in 0..n {
            let dc = dc_next[j] + dh[j] * s.output[j] * (1.0 - s.tanh_cell[j] * s.tanh_cell[j]);
            dz_o[j] = dh[j] * s.tanh_cell[j] * s.output[j] * (1.0 - s.output[j]);
            dz_i[j] = dc * s.candidate[j] * s.input[j] * (1.0 - s.input[j]);
            dz_f[j] = dc * c_prev[j] * s.forget[j] * (1.0 - s.forget[j]);
            dz_g[j] = dc * s.input[j] * (1.0 - s.candidate[j] * s.candidate[j]);
            dc_next[j] = dc * s.forget[j];
        }
        grads.input.accumulate(&dz_i, &s.x, h_prev);
        grads.forget.accumulate(&dz_f, &s.x, h_prev);
        grads.output.accumulate(&dz_o, &s.x, h_prev);
        grads.cell.accumulate(&dz_g, &s.x, h_prev);

        let mut dh_prev = vec![0.0; n];
        params.input.w_h.mul_t_acc(&dz_i, &mut dh_prev);
        params.forget.w_h.mul_t_acc(&dz_f, &mut dh_prev);
        params.output.w_h.mul_t_acc(&dz_o, &mut dh_prev);
        params.cell.w_h.mul_t_acc(&dz_g, &mut dh_prev);
        dh = dh_prev;
    }
    grads
}
