//! LSTM cell, sequence unrolling and backpropagation through time.
//!
//! Per step, with `x` the input and `(h, m)` the previous hidden and memory
//! state:
//!
//! ```text
//! f  = σ(U_f x + W_f h + b_f)        forget gate
//! g  = tanh(U_c x + W_c h + b_c)     candidate
//! i  = σ(U_i x + W_i h + b_i)        input gate
//! o  = σ(U_o x + W_o h + b_o)        output gate
//! m' = f ⊙ m + i ⊙ g
//! h' = o ⊙ tanh(m')
//! y  = V h' + b_v
//! ```

use serde::{Deserialize, Serialize};

use super::params::{LstmParams, CANDIDATE, FORGET, INPUT, OUTPUT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub fn apply(self, b: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(b),
            Activation::Tanh => b.tanh(),
            Activation::Relu => b.max(0.0),
        }
    }
}

pub fn activation(kind: Activation, b: f64) -> f64 {
    kind.apply(b)
}

fn sigmoid(b: f64) -> f64 {
    // Split on sign so exp never overflows.
    if b >= 0.0 {
        1.0 / (1.0 + (-b).exp())
    } else {
        let e = b.exp();
        e / (1.0 + e)
    }
}

/// Hidden and memory state carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub memory: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            hidden: vec![0.0; hidden_size],
            memory: vec![0.0; hidden_size],
        }
    }
}

/// Intermediates of one step, retained for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub input: Vec<f64>,
    pub prev_hidden: Vec<f64>,
    pub prev_memory: Vec<f64>,
    pub forget: Vec<f64>,
    pub candidate: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub tanh_memory: Vec<f64>,
}

fn check_dims(params: &LstmParams, x: &[f64], state: &LstmState) -> Result<()> {
    params.check_shapes()?;
    if x.len() != params.input_size {
        return Err(Error::DimensionMismatch(format!(
            "input has {} entries, network expects {}",
            x.len(),
            params.input_size
        )));
    }
    if state.hidden.len() != params.hidden_size || state.memory.len() != params.hidden_size {
        return Err(Error::DimensionMismatch(format!(
            "state sizes {}/{} do not match hidden size {}",
            state.hidden.len(),
            state.memory.len(),
            params.hidden_size
        )));
    }
    Ok(())
}

fn step(params: &LstmParams, x: &[f64], state: &LstmState) -> (LstmState, Vec<f64>, StepCache) {
    let h = &state.hidden;
    let mut f = params.gates[FORGET].pre_activation(x, h);
    let mut g = params.gates[CANDIDATE].pre_activation(x, h);
    let mut i = params.gates[INPUT].pre_activation(x, h);
    let mut o = params.gates[OUTPUT].pre_activation(x, h);
    f.iter_mut().for_each(|v| *v = sigmoid(*v));
    g.iter_mut().for_each(|v| *v = v.tanh());
    i.iter_mut().for_each(|v| *v = sigmoid(*v));
    o.iter_mut().for_each(|v| *v = sigmoid(*v));

    let memory: Vec<f64> = (0..params.hidden_size)
        .map(|k| f[k] * state.memory[k] + i[k] * g[k])
        .collect();
    let tanh_memory: Vec<f64> = memory.iter().map(|v| v.tanh()).collect();
    let hidden: Vec<f64> = o.iter().zip(&tanh_memory).map(|(a, b)| a * b).collect();

    let mut output = params.head_bias.clone();
    params.head.mul_vec_add(&hidden, &mut output);

    let cache = StepCache {
        input: x.to_vec(),
        prev_hidden: state.hidden.clone(),
        prev_memory: state.memory.clone(),
        forget: f,
        candidate: g,
        input_gate: i,
        output_gate: o,
        tanh_memory,
    };
    (LstmState { hidden, memory }, output, cache)
}

/// One cell step. Returns the new state and the head output.
pub fn cell_forward(params: &LstmParams, x: &[f64], state: &LstmState) -> Result<(LstmState, Vec<f64>)> {
    check_dims(params, x, state)?;
    let (next, out, _) = step(params, x, state);
    Ok((next, out))
}

/// Result of unrolling the cell over a sequence.
#[derive(Debug, Clone)]
pub struct SequenceOutput {
    pub outputs: Vec<Vec<f64>>,
    pub final_state: LstmState,
    pub caches: Vec<StepCache>,
}

pub fn forward_sequence(params: &LstmParams, inputs: &[Vec<f64>], initial: &LstmState) -> Result<SequenceOutput> {
    if inputs.is_empty() {
        return Err(Error::InsufficientData("empty input sequence".into()));
    }
    let mut state = initial.clone();
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut caches = Vec::with_capacity(inputs.len());
    for x in inputs {
        check_dims(params, x, &state)?;
        let (next, out, cache) = step(params, x, &state);
        outputs.push(out);
        caches.push(cache);
        state = next;
    }
    Ok(SequenceOutput {
        outputs,
        final_state: state,
        caches,
    })
}

/// Mean over time of `½‖y_t - target_t‖²`, starting from a zero state.
pub fn sequence_loss(params: &LstmParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_targets(params, inputs, targets)?;
    let fwd = forward_sequence(params, inputs, &LstmState::zeros(params.hidden_size))?;
    Ok(mean_half_sq(&fwd.outputs, targets))
}

fn check_targets(params: &LstmParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: targets.len(),
        });
    }
    if let Some(t) = targets.iter().find(|t| t.len() != params.output_size) {
        return Err(Error::DimensionMismatch(format!(
            "target has {} entries, network outputs {}",
            t.len(),
            params.output_size
        )));
    }
    Ok(())
}

fn mean_half_sq(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let total: f64 = outputs
        .iter()
        .zip(targets)
        .flat_map(|(y, t)| y.iter().zip(t).map(|(a, b)| 0.5 * (a - b) * (a - b)))
        .sum();
    total / outputs.len() as f64
}

/// Loss and its gradient with respect to every parameter, by full
/// backpropagation through time from a zero initial state.
pub fn loss_and_gradients(
    params: &LstmParams,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<(f64, LstmParams)> {
    check_targets(params, inputs, targets)?;
    let fwd = forward_sequence(params, inputs, &LstmState::zeros(params.hidden_size))?;
    let loss = mean_half_sq(&fwd.outputs, targets);
    let grads = backward(params, &fwd, targets);
    Ok((loss, grads))
}

fn backward(params: &LstmParams, fwd: &SequenceOutput, targets: &[Vec<f64>]) -> LstmParams {
    let n = params.hidden_size;
    let scale = 1.0 / fwd.outputs.len() as f64;
    let mut grads = params.zeros_like();
    let mut dh_next = vec![0.0; n];
    let mut dm_next = vec![0.0; n];

    for t in (0..fwd.caches.len()).rev() {
        let c = &fwd.caches[t];
        let hidden: Vec<f64> = c.output_gate.iter().zip(&c.tanh_memory).map(|(o, tm)| o * tm).collect();
        let dy: Vec<f64> = fwd.outputs[t]
            .iter()
            .zip(&targets[t])
            .map(|(y, target)| (y - target) * scale)
            .collect();

        grads.head.add_outer(&dy, &hidden);
        for (gb, d) in grads.head_bias.iter_mut().zip(&dy) {
            *gb += d;
        }

        let mut dh = dh_next.clone();
        params.head.mul_t_vec_add(&dy, &mut dh);

        let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
        for k in 0..n {
            let (f, g, i, o, tm) = (
                c.forget[k],
                c.candidate[k],
                c.input_gate[k],
                c.output_gate[k],
                c.tanh_memory[k],
            );
            let d_o = dh[k] * tm;
            let dm = dh[k] * o * (1.0 - tm * tm) + dm_next[k];
            da[FORGET][k] = dm * c.prev_memory[k] * f * (1.0 - f);
            da[INPUT][k] = dm * g * i * (1.0 - i);
            da[CANDIDATE][k] = dm * i * (1.0 - g * g);
            da[OUTPUT][k] = d_o * o * (1.0 - o);
            dm_next[k] = dm * f;
        }

        dh_next.iter_mut().for_each(|v| *v = 0.0);
        for (gate, (grad, d)) in params.gates.iter().zip(grads.gates.iter_mut().zip(&da)) {
            grad.input.add_outer(d, &c.input);
            grad.recurrent.add_outer(d, &c.prev_hidden);
            for (gb, dv) in grad.bias.iter_mut().zip(d) {
                *gb += dv;
            }
            gate.recurrent.mul_t_vec_add(d, &mut dh_next);
        }
    }
    grads
}
