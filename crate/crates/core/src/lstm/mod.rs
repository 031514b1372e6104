//! Single-layer LSTM forecaster written from scratch.
//!
//! The network is trained on next-step supervision (input `y_t`, target
//! `y_{t+1}`) with full-sequence BPTT, Adam updates and global-norm gradient
//! clipping. Everything runs in `f64` so finite-difference checks are
//! meaningful.

mod adam;
mod cell;
mod params;
mod persist;

pub use adam::Adam;
pub use cell::{
    activation, cell_forward, forward_sequence, loss_and_gradients, sequence_loss, Activation, LstmState,
    SequenceOutput, StepCache,
};
pub use persist::HEADER;
pub use params::{clip_gradients, Gate, LstmParams, Mat, CANDIDATE, FORGET, GATE_SUFFIX, INPUT, OUTPUT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub grad_clip_norm: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            hidden_size: 100,
            learning_rate: 0.005,
            grad_clip_norm: 1.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 42,
            standardize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.epochs < 1 {
            return bad("epochs must be at least 1".into());
        }
        if self.hidden_size < 1 {
            return bad("hidden_size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.grad_clip_norm > 0.0 && self.grad_clip_norm.is_finite()) {
            return bad(format!("grad_clip_norm must be positive, got {}", self.grad_clip_norm));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)".into());
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("adam_epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Z-score transform fitted on training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub const IDENTITY: Standardizer = Standardizer { mean: 0.0, std: 1.0 };

    /// Population mean and deviation. A zero deviation (constant data) is
    /// replaced by 1 so the transform stays invertible.
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        Self {
            mean,
            std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Per-iteration training trace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    /// Mean half squared error in the standardized space.
    pub loss: Vec<f64>,
    /// One-step RMSE in original units.
    pub rmse: Vec<f64>,
}

impl TrainingCurve {
    pub fn len(&self) -> usize {
        self.loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,loss,rmse\n");
        for (k, (l, r)) in self.loss.iter().zip(&self.rmse).enumerate() {
            out.push_str(&format!("{},{l:.9e},{r:.9e}\n", k + 1));
        }
        out
    }
}

/// Trained network together with the data transform and the configuration
/// that produced it. Immutable after training; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub params: LstmParams,
    pub standardizer: Standardizer,
    pub config: TrainConfig,
}

fn sequence_pairs(samples: &[f64], s: &Standardizer) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let z: Vec<f64> = samples.iter().map(|&v| s.forward(v)).collect();
    let inputs = z[..z.len() - 1].iter().map(|&v| vec![v]).collect();
    let targets = z[1..].iter().map(|&v| vec![v]).collect();
    (inputs, targets)
}

/// Train on next-step prediction over each trajectory. One Adam step per
/// trajectory per epoch.
pub fn train(sequences: &[Trajectory], config: &TrainConfig) -> Result<(LstmModel, TrainingCurve)> {
    config.validate()?;
    if sequences.is_empty() {
        return Err(Error::InsufficientData("no training trajectories".into()));
    }
    if let Some(short) = sequences.iter().find(|t| t.len() < 2) {
        return Err(Error::InsufficientData(format!(
            "training trajectory of vehicle {} has {} sample(s), need at least 2",
            short.vehicle_id,
            short.len()
        )));
    }

    let standardizer = if config.standardize {
        let all: Vec<f64> = sequences.iter().flat_map(|t| t.samples.iter().copied()).collect();
        Standardizer::fit(&all)
    } else {
        Standardizer::IDENTITY
    };
    let data: Vec<_> = sequences
        .iter()
        .map(|t| sequence_pairs(&t.samples, &standardizer))
        .collect();

    let mut params = LstmParams::init(1, config.hidden_size, 1, config.seed);
    let mut opt = Adam::new(
        &params,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
    );
    let mut curve = TrainingCurve::default();

    for _ in 0..config.epochs {
        for (inputs, targets) in &data {
            let (loss, mut grads) = loss_and_gradients(&params, inputs, targets)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::DivergedTraining {
                    iteration: curve.len() + 1,
                    loss,
                });
            }
            curve.loss.push(loss);
            curve.rmse.push((2.0 * loss).sqrt() * standardizer.std);
            clip_gradients(&mut grads, config.grad_clip_norm);
            opt.update(&mut params, &grads);
        }
    }

    Ok((
        LstmModel {
            params,
            standardizer,
            config: config.clone(),
        },
        curve,
    ))
}

impl LstmModel {
    /// Feed the observed trace step by step; element `t - 1` of the result is
    /// the prediction of `samples[t]` made after seeing `samples[..t]`.
    pub fn predict_open_loop(&self, trajectory: &Trajectory) -> Result<Vec<f64>> {
        if trajectory.len() < 2 {
            return Err(Error::InsufficientData("open-loop prediction needs at least two samples".into()));
        }
        let s = &self.standardizer;
        let inputs: Vec<Vec<f64>> = trajectory.samples[..trajectory.len() - 1]
            .iter()
            .map(|&v| vec![s.forward(v)])
            .collect();
        let fwd = forward_sequence(&self.params, &inputs, &LstmState::zeros(self.params.hidden_size))?;
        Ok(fwd.outputs.iter().map(|y| s.inverse(y[0])).collect())
    }

    /// Warm the state up on `seed_history`, then feed each prediction back as
    /// the next input for `horizon` steps.
    pub fn predict_closed_loop(&self, seed_history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        if horizon < 1 {
            return Err(Error::InvalidHorizon(horizon));
        }
        if seed_history.is_empty() {
            return Err(Error::InsufficientData("closed-loop prediction needs a seed history".into()));
        }
        let s = &self.standardizer;
        let inputs: Vec<Vec<f64>> = seed_history.iter().map(|&v| vec![s.forward(v)]).collect();
        let fwd = forward_sequence(&self.params, &inputs, &LstmState::zeros(self.params.hidden_size))?;
        let mut state = fwd.final_state;
        let mut z = fwd.outputs.last().expect("non-empty")[0];
        let mut out = Vec::with_capacity(horizon);
        out.push(s.inverse(z));
        for _ in 1..horizon {
            let (next, y) = cell_forward(&self.params, &[z], &state)?;
            state = next;
            z = y[0];
            out.push(s.inverse(z));
        }
        Ok(out)
    }
}
