//! Slow reference computations used to verify the fast paths.

use crate::error::Result;
use crate::lstm::{loss_and_gradients, sequence_loss, LstmParams};
use crate::markov::{Fallback, TransitionModel};

/// Expected grid value `n` steps after state `from`, by summing over every
/// path of length `n`. Probabilities come straight from the counts; runtime
/// is `O(M^n)`.
pub fn markov_path_expectation(model: &TransitionModel, from: usize, n: usize) -> f64 {
    let m = model.num_states();
    let grid = model.state_space().grid();
    let p = |i: usize, j: usize| {
        let total = model.row_total(i);
        if total > 0 {
            return model.count(i, j) as f64 / total as f64;
        }
        match model.fallback {
            Fallback::ZeroRow => 0.0,
            Fallback::Hold => f64::from(u8::from(i == j)),
            Fallback::Uniform => 1.0 / m as f64,
        }
    };
    fn walk(state: usize, left: usize, weight: f64, m: usize, grid: &[f64], p: &dyn Fn(usize, usize) -> f64) -> f64 {
        if left == 0 {
            return weight * grid[state];
        }
        (0..m)
            .map(|j| {
                let w = weight * p(state, j);
                if w == 0.0 {
                    0.0
                } else {
                    walk(j, left - 1, w, m, grid, p)
                }
            })
            .sum()
    }
    walk(from, n, 1.0, m, grid, &p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    /// Tensor name and flat index where it occurred.
    pub worst: (String, usize),
    pub checked: usize,
}

/// Compare backpropagated gradients with central differences of the loss,
/// one parameter at a time. `floor` keeps near-zero gradients from
/// dominating the relative error.
pub fn lstm_gradient_check(
    params: &LstmParams,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    step: f64,
    floor: f64,
) -> Result<GradientCheck> {
    let (_, grads) = loss_and_gradients(params, inputs, targets)?;
    let names = LstmParams::tensor_names();
    let analytic = grads.tensors();
    let mut out = GradientCheck {
        max_rel_error: 0.0,
        worst: (String::new(), 0),
        checked: 0,
    };
    let mut probe = params.clone();
    for (t, g) in analytic.iter().enumerate() {
        for k in 0..g.len() {
            let original = probe.tensors()[t][k];
            probe.tensors_mut()[t][k] = original + step;
            let up = sequence_loss(&probe, inputs, targets)?;
            probe.tensors_mut()[t][k] = original - step;
            let down = sequence_loss(&probe, inputs, targets)?;
            probe.tensors_mut()[t][k] = original;
            let numeric = (up - down) / (2.0 * step);
            let err = (g[k] - numeric).abs() / g[k].abs().max(numeric.abs()).max(floor);
            if err > out.max_rel_error {
                out.max_rel_error = err;
                out.worst = (names[t].clone(), k);
            }
            out.checked += 1;
        }
    }
    Ok(out)
}
