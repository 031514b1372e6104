use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Glorot-uniform entries in `±sqrt(6 / (fan_in + fan_out))`.
    fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `out += self * x`
    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// `out += selfᵀ * v`
    pub fn mul_t_vec_add(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&vr, row) in v.iter().zip(self.data.chunks_exact(self.cols)) {
            if vr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += vr * a;
            }
        }
    }

    /// `self += a bᵀ`
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (&ar, row) in a.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if ar == 0.0 {
                continue;
            }
            for (x, bc) in row.iter_mut().zip(b) {
                *x += ar * bc;
            }
        }
    }
}

/// Gate indices into [`LstmParams::gates`].
pub const FORGET: usize = 0;
pub const CANDIDATE: usize = 1;
pub const INPUT: usize = 2;
pub const OUTPUT: usize = 3;

/// Suffixes used when naming gate tensors (`U_f`, `W_c`, `b_i`, ...).
pub const GATE_SUFFIX: [&str; 4] = ["f", "c", "i", "o"];

/// Affine map feeding one gate: `U x + W h + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub input: Mat,
    pub recurrent: Mat,
    pub bias: Vec<f64>,
}

impl Gate {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            input: Mat::zeros(hidden, input),
            recurrent: Mat::zeros(hidden, hidden),
            bias: vec![0.0; hidden],
        }
    }

    /// `U x + W h + b`
    pub fn pre_activation(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        self.input.mul_vec_add(x, &mut out);
        self.recurrent.mul_vec_add(h, &mut out);
        out
    }
}

/// Weights of a single-layer LSTM with a linear output head. Gradients use the
/// same type.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input_size: usize,
    pub hidden_size: usize,
    pub output_size: usize,
    /// Forget, candidate, input and output gates, in that order.
    pub gates: [Gate; 4],
    pub head: Mat,
    pub head_bias: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden_size: usize, output_size: usize) -> Self {
        Self {
            input_size,
            hidden_size,
            output_size,
            gates: std::array::from_fn(|_| Gate::zeros(hidden_size, input_size)),
            head: Mat::zeros(output_size, hidden_size),
            head_bias: vec![0.0; output_size],
        }
    }

    /// Glorot-uniform weights per matrix, zero biases.
    pub fn init(input_size: usize, hidden_size: usize, output_size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros(input_size, hidden_size, output_size);
        for gate in &mut p.gates {
            gate.input = Mat::glorot(hidden_size, input_size, &mut rng);
            gate.recurrent = Mat::glorot(hidden_size, hidden_size, &mut rng);
        }
        p.head = Mat::glorot(output_size, hidden_size, &mut rng);
        p
    }

    /// Zeroed tensor of identical shape.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size, self.hidden_size, self.output_size)
    }

    /// Tensor names in storage order, matching [`tensors`](Self::tensors).
    pub fn tensor_names() -> Vec<String> {
        let mut names = Vec::with_capacity(14);
        for s in GATE_SUFFIX {
            names.push(format!("U_{s}"));
            names.push(format!("W_{s}"));
            names.push(format!("b_{s}"));
        }
        names.push("V".into());
        names.push("b_v".into());
        names
    }

    /// `(rows, cols)` of each tensor in storage order. Bias vectors are `n x 1`.
    pub fn tensor_shapes(&self) -> Vec<(usize, usize)> {
        let (i, h, o) = (self.input_size, self.hidden_size, self.output_size);
        let mut shapes = Vec::with_capacity(14);
        for _ in 0..4 {
            shapes.extend([(h, i), (h, h), (h, 1)]);
        }
        shapes.extend([(o, h), (o, 1)]);
        shapes
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(14);
        for g in &self.gates {
            out.push(&g.input.data);
            out.push(&g.recurrent.data);
            out.push(&g.bias);
        }
        out.push(&self.head.data);
        out.push(&self.head_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(14);
        for g in &mut self.gates {
            out.push(&mut g.input.data);
            out.push(&mut g.recurrent.data);
            out.push(&mut g.bias);
        }
        out.push(&mut self.head.data);
        out.push(&mut self.head_bias);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Global L2 norm over every entry.
    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (i, h, o) = (self.input_size, self.hidden_size, self.output_size);
        let ok = self.gates.iter().all(|g| {
            (g.input.rows, g.input.cols) == (h, i)
                && (g.recurrent.rows, g.recurrent.cols) == (h, h)
                && g.bias.len() == h
                && g.input.data.len() == h * i
                && g.recurrent.data.len() == h * h
        }) && (self.head.rows, self.head.cols) == (o, h)
            && self.head.data.len() == o * h
            && self.head_bias.len() == o;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "parameter tensors inconsistent with sizes input={i} hidden={h} output={o}"
            )))
        }
    }
}

/// Rescale `gradients` so their global L2 norm is at most `threshold`.
/// Returns the norm before clipping.
pub fn clip_gradients(gradients: &mut LstmParams, threshold: f64) -> f64 {
    let norm = gradients.norm();
    if norm > threshold {
        gradients.scale(threshold / norm);
    }
    norm
}
