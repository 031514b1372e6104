//! Velocity time-series forecasting with three predictors:
//!
//! * [`markov`]: nearest-neighbourhood quantization plus a maximum-likelihood
//!   Markov transition matrix,
//! * [`fuzzy`]: Gaussian fuzzy coding with soft transition counts,
//! * [`lstm`]: a single-layer LSTM trained by backpropagation through time.
//!
//! [`trajectory`] turns NGSIM-style records into velocity traces and
//! [`eval`] runs the online-learning, horizon and comparison experiments;
//! [`check`] holds slow reference computations used by the test suites.

pub mod check;
pub mod error;
pub mod eval;
pub mod fuzzy;
pub mod lstm;
pub mod markov;
pub mod synth;
pub mod trajectory;
pub mod util;

pub use error::{Error, Result};
pub use trajectory::Trajectory;

/// NGSIM-format excerpt bundled for deterministic experiments (speeds in ft/s).
pub const SAMPLE_TRACE_CSV: &str = include_str!("../data/us101_sample.csv");

/// Vehicle in [`SAMPLE_TRACE_CSV`] used by the bundled experiments.
pub const SAMPLE_VEHICLE: i64 = 1;

/// Load the bundled sample trace for [`SAMPLE_VEHICLE`] in m/s at 10 Hz.
pub fn sample_trajectory() -> Trajectory {
    let cfg = trajectory::IngestConfig::default();
    let records = trajectory::parse_records(SAMPLE_TRACE_CSV, &cfg).expect("bundled sample parses");
    trajectory::extract_trajectory(&records, SAMPLE_VEHICLE, &cfg)
        .expect("bundled vehicle present")
        .into_iter()
        .max_by_key(Trajectory::len)
        .expect("at least one run")
}
