use serde::{Deserialize, Serialize};

use super::{backward, forward, init, LstmConfig, LstmParams, Normalizer};
use crate::error::{invalid, Error, Result};

/// Supervised windows: `inputs[t]` holds `k` feature vectors, oldest first,
/// and `targets[t]` the first feature one step later.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    pub inputs: Vec<Vec<Vec<f64>>>,
    pub targets: Vec<f64>,
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn lookback(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().and_then(|w| w.first()).map_or(0, Vec::len)
    }

    /// All values of one feature seen by the set, targets included for the
    /// first feature.
    pub fn feature_values(&self, feature: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.inputs.iter().flatten().map(|v| v[feature]).collect();
        if feature == 0 {
            out.extend(&self.targets);
        }
        out
    }
}

/// Slices aligned feature series into windows of length `k`.
pub fn make_windows(features: &[&[f64]], k: usize) -> Result<SupervisedSet> {
    let n = features.first().map_or(0, |f| f.len());
    if features.is_empty() || features.iter().any(|f| f.len() != n) {
        return Err(invalid("feature series must be non-empty and equally long"));
    }
    if k == 0 || n <= k {
        return Err(invalid(format!("need more than k={k} observations, got {n}")));
    }
    let vector = |t: usize| features.iter().map(|f| f[t]).collect::<Vec<f64>>();
    let inputs = (k..n).map(|t| (t - k..t).map(vector).collect()).collect();
    let targets = (k..n).map(|t| features[0][t]).collect();
    Ok(SupervisedSet { inputs, targets })
}

/// A trained network with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedLstm {
    pub config: LstmConfig,
    pub params: LstmParams,
    pub normalizer: Normalizer,
    /// Training MSE in normalized units, one entry per epoch.
    pub loss_curve: Vec<f64>,
}

impl TrainedLstm {
    pub fn predict_one(&self, window: &[Vec<f64>]) -> Result<f64> {
        predict_one(&self.params, &self.normalizer, window)
    }
}

/// Normalize, run forward, and map the output back to the units of the
/// first feature.
pub fn predict_one(params: &LstmParams, normalizer: &Normalizer, window: &[Vec<f64>]) -> Result<f64> {
    if normalizer.dim() != params.input_dim() {
        return Err(invalid(format!(
            "normalizer has {} features, network expects {}",
            normalizer.dim(),
            params.input_dim()
        )));
    }
    if let Some(v) = window.iter().find(|v| v.len() != normalizer.dim()) {
        return Err(invalid(format!("input vector of length {}", v.len())));
    }
    let scaled: Vec<Vec<f64>> = window.iter().map(|v| normalizer.transform_vector(v)).collect();
    let z = forward(params, &scaled)?.prediction;
    Ok(normalizer.inverse(0, z))
}

/// Fits a min-max normalizer on `set` and trains from a fresh
/// initialization.
pub fn train(config: &LstmConfig, set: &SupervisedSet) -> Result<TrainedLstm> {
    check_set(config, set)?;
    let columns: Vec<Vec<f64>> = (0..config.input_dim).map(|c| set.feature_values(c)).collect();
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    let normalizer = Normalizer::fit(&refs)?;
    train_with(config, set, normalizer, &[])
}

/// Full-batch gradient descent with heavy-ball momentum under a given
/// normalizer.
///
/// Every epoch is one pass over all windows at a proposed parameter vector.
/// A proposal whose training MSE exceeds that of the current parameters is
/// rejected: the velocity is reset and the next proposal is a plain gradient
/// step, halved after each further rejection. `loss_curve[e]` is the MSE of
/// the parameters held after epoch `e`, so it never increases, and the
/// returned parameters are the ones its last entry measures.
///
/// Input channels listed in `frozen_inputs` have their input weights set to
/// zero and never updated, so the network ignores them entirely.
pub fn train_with(
    config: &LstmConfig,
    set: &SupervisedSet,
    normalizer: Normalizer,
    frozen_inputs: &[usize],
) -> Result<TrainedLstm> {
    check_set(config, set)?;
    if normalizer.dim() != config.input_dim {
        return Err(invalid("normalizer dimension differs from input_dim"));
    }
    if let Some(c) = frozen_inputs.iter().find(|&&c| c >= config.input_dim) {
        return Err(invalid(format!("frozen channel {c} out of range")));
    }
    let mut params = init(config)?;
    for &c in frozen_inputs {
        params.zero_input_channel(c);
    }

    let inputs: Vec<Vec<Vec<f64>>> = set
        .inputs
        .iter()
        .map(|w| w.iter().map(|v| normalizer.transform_vector(v)).collect())
        .collect();
    let targets: Vec<f64> = set.targets.iter().map(|&y| normalizer.transform(0, y)).collect();
    let batch = Batch {
        inputs: &inputs,
        targets: &targets,
        frozen: frozen_inputs,
        clip: config.grad_clip,
    };

    let mut loss_curve = Vec::with_capacity(config.epochs);
    if config.epochs > 0 {
        let (mut loss, mut grad) = batch.evaluate(&params, 1)?;
        loss_curve.push(loss);
        let mut velocity = scaled(&grad, -config.learning_rate);
        let mut backoff = 1.0;
        for epoch in 2..=config.epochs {
            let proposal = add(&params, &velocity);
            let (proposal_loss, proposal_grad) = batch.evaluate(&proposal, epoch)?;
            if proposal_loss <= loss {
                params = proposal;
                loss = proposal_loss;
                grad = proposal_grad;
                backoff = 1.0;
                velocity = add(
                    &scaled(&velocity, config.momentum),
                    &scaled(&grad, -config.learning_rate),
                );
            } else {
                velocity = scaled(&grad, -config.learning_rate * backoff);
                backoff *= 0.5;
            }
            loss_curve.push(loss);
        }
    }
    Ok(TrainedLstm {
        config: config.clone(),
        params,
        normalizer,
        loss_curve,
    })
}

struct Batch<'a> {
    inputs: &'a [Vec<Vec<f64>>],
    targets: &'a [f64],
    frozen: &'a [usize],
    clip: f64,
}

impl Batch<'_> {
    /// Training MSE and the clipped mean gradient of `½ (p − t)²`.
    fn evaluate(&self, params: &LstmParams, epoch: usize) -> Result<(f64, LstmParams)> {
        if !params.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let mut total = LstmParams::zeros(params.input_dim(), params.hidden_size());
        let mut sse = 0.0;
        for (window, &target) in self.inputs.iter().zip(self.targets) {
            let cache = forward(params, window)?;
            sse += (cache.prediction - target).powi(2);
            let g = backward(params, &cache, target);
            for (acc, part) in total.slices_mut().into_iter().zip(g.slices()) {
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
        }
        let count = self.targets.len() as f64;
        let mse = sse / count;
        if !mse.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        for &c in self.frozen {
            total.zero_input_channel(c);
        }
        let norm = total
            .slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|g| (g / count).powi(2))
            .sum::<f64>()
            .sqrt();
        let factor = if norm > self.clip { self.clip / norm } else { 1.0 } / count;
        for s in total.slices_mut() {
            s.iter_mut().for_each(|g| *g *= factor);
        }
        Ok((mse, total))
    }
}

fn scaled(p: &LstmParams, factor: f64) -> LstmParams {
    let mut out = p.clone();
    for s in out.slices_mut() {
        s.iter_mut().for_each(|v| *v *= factor);
    }
    out
}

fn add(a: &LstmParams, b: &LstmParams) -> LstmParams {
    let mut out = a.clone();
    for (x, y) in out.slices_mut().into_iter().zip(b.slices()) {
        for (u, v) in x.iter_mut().zip(y) {
            *u += v;
        }
    }
    out
}

fn check_set(config: &LstmConfig, set: &SupervisedSet) -> Result<()> {
    config.validate()?;
    if set.is_empty() {
        return Err(invalid("no training windows"));
    }
    if set.inputs.len() != set.targets.len() {
        return Err(invalid("inputs and targets differ in length"));
    }
    if set.input_dim() != config.input_dim {
        return Err(invalid(format!(
            "windows have {} features, config expects {}",
            set.input_dim(),
            config.input_dim
        )));
    }
    if set.inputs.iter().any(|w| w.len() != config.lookback_k) {
        return Err(invalid(format!("every window must have length {}", config.lookback_k)));
    }
    Ok(())
}
