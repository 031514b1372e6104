//! Plain-text model files.
//!
//! ```text
//! seqcast-lstm v1
//! input_size 1
//! hidden_size 100
//! output_size 1
//! standardize true
//! mean 1.2e1
//! std 3.4e0
//! epochs 150
//! ...
//! tensor U_f 100 1
//! <one row per line, 12 significant digits, space separated>
//! ...
//! end
//! ```

use std::fmt::Write as _;

use super::params::LstmParams;
use super::{LstmModel, Standardizer, TrainConfig};
use crate::error::{Error, Result};
use crate::util::fmt_sig12;

pub const HEADER: &str = "seqcast-lstm v1";

impl LstmModel {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "input_size {}", p.input_size);
        let _ = writeln!(out, "hidden_size {}", p.hidden_size);
        let _ = writeln!(out, "output_size {}", p.output_size);
        let _ = writeln!(out, "standardize {}", c.standardize);
        let _ = writeln!(out, "mean {:?}", self.standardizer.mean);
        let _ = writeln!(out, "std {:?}", self.standardizer.std);
        let _ = writeln!(out, "epochs {}", c.epochs);
        let _ = writeln!(out, "learning_rate {:?}", c.learning_rate);
        let _ = writeln!(out, "grad_clip_norm {:?}", c.grad_clip_norm);
        let _ = writeln!(out, "adam_beta1 {:?}", c.adam_beta1);
        let _ = writeln!(out, "adam_beta2 {:?}", c.adam_beta2);
        let _ = writeln!(out, "adam_epsilon {:?}", c.adam_epsilon);
        let _ = writeln!(out, "seed {}", c.seed);
        for ((name, (rows, cols)), data) in LstmParams::tensor_names()
            .iter()
            .zip(p.tensor_shapes())
            .zip(p.tensors())
        {
            let _ = writeln!(out, "tensor {name} {rows} {cols}");
            for row in data.chunks(cols) {
                let cells: Vec<String> = row.iter().map(|&v| fmt_sig12(v)).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(HEADER) {
            return Err(Error::Format(format!("missing '{HEADER}' header line")));
        }

        let mut scalar = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Format(format!("missing '{key}'")))?;
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ => Err(Error::Format(format!("expected '{key}', found '{line}'"))),
            }
        };
        fn parse<T: std::str::FromStr>(key: &str, v: String) -> Result<T> {
            v.parse().map_err(|_| Error::Format(format!("bad value for '{key}': '{v}'")))
        }

        let input_size: usize = parse("input_size", scalar("input_size")?)?;
        let hidden_size: usize = parse("hidden_size", scalar("hidden_size")?)?;
        let output_size: usize = parse("output_size", scalar("output_size")?)?;
        let standardize: bool = parse("standardize", scalar("standardize")?)?;
        let mean: f64 = parse("mean", scalar("mean")?)?;
        let std: f64 = parse("std", scalar("std")?)?;
        let config = TrainConfig {
            epochs: parse("epochs", scalar("epochs")?)?,
            hidden_size,
            learning_rate: parse("learning_rate", scalar("learning_rate")?)?,
            grad_clip_norm: parse("grad_clip_norm", scalar("grad_clip_norm")?)?,
            adam_beta1: parse("adam_beta1", scalar("adam_beta1")?)?,
            adam_beta2: parse("adam_beta2", scalar("adam_beta2")?)?,
            adam_epsilon: parse("adam_epsilon", scalar("adam_epsilon")?)?,
            seed: parse("seed", scalar("seed")?)?,
            standardize,
        };

        let mut params = LstmParams::zeros(input_size, hidden_size, output_size);
        let names = LstmParams::tensor_names();
        let shapes = params.tensor_shapes();
        let mut tensors: Vec<Vec<f64>> = Vec::with_capacity(names.len());
        for (name, &(rows, cols)) in names.iter().zip(&shapes) {
            let head = lines.next().ok_or_else(|| Error::Format(format!("missing tensor {name}")))?;
            let expected = format!("tensor {name} {rows} {cols}");
            if head != expected {
                return Err(Error::Format(format!("expected '{expected}', found '{head}'")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let row = lines
                    .next()
                    .ok_or_else(|| Error::Format(format!("tensor {name} truncated")))?;
                let before = data.len();
                for cell in row.split_whitespace() {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| Error::Format(format!("bad number '{cell}' in tensor {name}")))?;
                    if !v.is_finite() {
                        return Err(Error::Format(format!("non-finite entry in tensor {name}")));
                    }
                    data.push(v);
                }
                if data.len() - before != cols {
                    return Err(Error::Format(format!("tensor {name}: row width differs from {cols}")));
                }
            }
            tensors.push(data);
        }
        if lines.next() != Some("end") {
            return Err(Error::Format("missing 'end' marker".into()));
        }

        for (dst, src) in params.tensors_mut().into_iter().zip(&tensors) {
            dst.copy_from_slice(src);
        }
        params.check_shapes()?;

        Ok(Self {
            params,
            standardizer: Standardizer { mean, std },
            config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::train;
    use crate::trajectory::Trajectory;

    fn tiny_model() -> LstmModel {
        let t = Trajectory::from_samples((0..20).map(|k| 3.0 + (k as f64 * 0.5).sin()).collect()).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            hidden_size: 3,
            ..TrainConfig::default()
        };
        train(&[t], &cfg).unwrap().0
    }

    #[test]
    fn text_round_trip_is_stable() {
        let model = tiny_model();
        let text = model.to_text();
        assert!(text.starts_with("seqcast-lstm v1\ninput_size 1\nhidden_size 3\n"));
        let back = LstmModel::from_text(&text).unwrap();
        assert_eq!(back.config, model.config);
        assert_eq!(back.standardizer, model.standardizer);
        for (a, b) in back.params.flatten().iter().zip(model.params.flatten()) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
        }
        // Re-serializing a loaded model reproduces the file byte for byte.
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_wrong_header_and_truncation() {
        assert!(LstmModel::from_text("seqcast-lstm v2\n").is_err());
        let text = tiny_model().to_text();
        let cut = &text[..text.len() / 2];
        assert!(matches!(LstmModel::from_text(cut), Err(Error::Format(_))));
    }
}
