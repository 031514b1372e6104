//! Deterministic reference checks on fixed instances and the bundled trace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqcast::check::{lstm_gradient_check, markov_path_expectation};
use seqcast::eval::{self, CompareConfig, FcConfig, Method, NnConfig, Protocol, TransitionPredictor};
use seqcast::fuzzy::{standard_center, FuzzyPartition, FuzzyTransitionModel};
use seqcast::lstm::{self, LstmModel, LstmParams, TrainConfig};
use seqcast::markov::{build_state_space, Fallback, StateSpace, TransitionModel};
use seqcast::util::digest_f64;
use seqcast::{sample_trajectory, synth, Trajectory};

/// Random gate and head parameters with nonzero biases.
fn random_params(rng: &mut ChaCha8Rng, hidden: usize) -> LstmParams {
    let mut p = LstmParams::init(1, hidden, 1, rng.gen());
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
    }
    p
}

#[test]
fn gradients_match_central_differences() {
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = rng.gen_range(1..=8);
        let len = rng.gen_range(2..=10);
        let p = random_params(&mut rng, hidden);
        let xs: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let ys: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let r = lstm_gradient_check(&p, &xs, &ys, 1e-5, 1e-4).unwrap();
        assert!(r.max_rel_error <= 1e-5, "seed {seed}: {r:?}");
    }
}

#[test]
fn multistep_oracle_on_fixed_models() {
    let space = StateSpace::from_grid(vec![1.25, 3.75, 6.25, 8.75]).unwrap();
    let counts = vec![0, 3, 1, 0, 2, 2, 0, 0, 0, 0, 0, 0, 1, 0, 0, 5];
    for fallback in [Fallback::ZeroRow, Fallback::Hold, Fallback::Uniform] {
        let m = TransitionModel::from_counts(space.clone(), counts.clone(), fallback).unwrap();
        for from in 0..4 {
            let fast = m.predict_multistep(space.grid()[from], 4).unwrap();
            for (k, v) in fast.iter().enumerate() {
                assert!((v - markov_path_expectation(&m, from, k + 1)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn fc_reduces_to_nn_in_the_crisp_limit() {
    let m = 8;
    let centers: Vec<f64> = (1..=m).map(standard_center).collect();
    // Random walk over neighbouring centers.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut i = 3usize;
    let mut samples = Vec::new();
    for _ in 0..400 {
        samples.push(centers[i]);
        i = (i as i64 + rng.gen_range(-1..=1)).clamp(0, m as i64 - 1) as usize;
    }
    let t = Trajectory::from_samples(samples).unwrap();

    let mut fc = FuzzyTransitionModel::new(FuzzyPartition::new(m, 0.05).unwrap());
    fc.fit(&t).unwrap();
    let mut nn = TransitionModel::new(build_state_space(centers[0], centers[m - 1], 2.5).unwrap(), Fallback::ZeroRow);
    nn.fit(&t).unwrap();
    assert_eq!(nn.state_space().grid(), centers.as_slice());
    for (k, &c) in centers.iter().enumerate() {
        if nn.row_total(k) == 0 {
            continue;
        }
        let a = fc.predict(c).unwrap();
        let b = nn.predict_expectation(c).unwrap();
        assert!((a - b).abs() <= 1e-3, "center {c}: fc {a} nn {b}");
    }
}

fn fitted_fc(trace: &Trajectory, quad_step: f64) -> FuzzyTransitionModel {
    let cfg = FcConfig {
        quad_step,
        ..FcConfig::default()
    };
    let mut m = cfg.build(trace).unwrap();
    m.fit(trace).unwrap();
    m
}

#[test]
fn fc_quadrature_is_converged() {
    let trace = sample_trajectory();
    let coarse = fitted_fc(&trace, 0.01);
    let fine = fitted_fc(&trace, 0.005);
    for &y in &trace.samples {
        let d = (coarse.predict(y).unwrap() - fine.predict(y).unwrap()).abs();
        assert!(d < 1e-6, "y={y}: {d}");
    }
}

#[test]
fn fc_prediction_is_smooth() {
    let trace = sample_trajectory();
    let m = fitted_fc(&trace, 0.01);
    for &y in &trace.samples {
        let d = (m.predict(y + 1e-6).unwrap() - m.predict(y).unwrap()).abs();
        assert!(d <= 1e-3, "jump of {d} at y={y}");
    }
    // NN, in contrast, jumps at cell boundaries.
    let mut nn = NnConfig::default().build(&trace).unwrap();
    nn.fit(&trace).unwrap();
    let edge = 0.5 * (nn.state_space().grid()[2] + nn.state_space().grid()[3]);
    let jump = (nn.predict_expectation(edge + 1e-6).unwrap() - nn.predict_expectation(edge - 1e-6).unwrap()).abs();
    assert!(jump > 1e-3);
}

#[test]
fn every_record_observes_the_trace() {
    let trace = sample_trajectory();
    let y = &trace.samples;
    let check = |report: &eval::ExperimentReport| {
        let mut n = 0;
        for m in &report.methods {
            for r in &m.rounds {
                for rec in &r.records {
                    assert_eq!(rec.observed.to_bits(), y[rec.origin_index + rec.horizon_step].to_bits());
                    n += 1;
                }
            }
        }
        assert!(n > 0);
    };
    for protocol in [Protocol::Batch, Protocol::Online] {
        let p = TransitionPredictor::Fc(FcConfig::default().build(&trace).unwrap());
        check(&eval::run_rounds(p, &trace, 2, protocol).unwrap().0);
    }
    let (report, _) = eval::run_horizon(NnConfig::default().build(&trace).unwrap(), &trace, 7, 2).unwrap();
    check(&report);
    // Horizon truncation near the end: the last origin has only one step.
    let last = report.methods[0].rounds[0].records.last().unwrap();
    assert_eq!((last.origin_index, last.horizon_step), (y.len() - 2, 1));

    let cfg = CompareConfig {
        lstm: tiny_lstm(),
        ..CompareConfig::default()
    };
    check(&eval::compare_methods(&trace, &[Method::Nn, Method::Fc, Method::Lstm], &cfg).unwrap().report);
}

fn tiny_lstm() -> TrainConfig {
    TrainConfig {
        epochs: 3,
        hidden_size: 4,
        ..TrainConfig::default()
    }
}

#[test]
fn compare_feeds_every_method_the_same_input() {
    let trace = sample_trajectory();
    let cfg = CompareConfig {
        lstm: tiny_lstm(),
        ..CompareConfig::default()
    };
    let c = eval::compare_methods(&trace, &[Method::Lstm, Method::Fc, Method::Nn], &cfg).unwrap();
    let labels: Vec<&str> = c.report.methods.iter().map(|m| m.label.as_str()).collect();
    assert_eq!(labels, ["nn", "fc", "lstm"]);
    let expected = digest_f64(&trace.samples);
    assert!(c.report.methods.iter().all(|m| m.input_digest == expected));
    let json = c.report.to_json(false);
    assert_eq!(json.matches(&expected).count(), 3);
}

#[test]
fn reports_are_reproducible() {
    let trace = sample_trajectory();
    let cfg = CompareConfig {
        lstm: tiny_lstm(),
        ..CompareConfig::default()
    };
    let run = || eval::compare_methods(&trace, &[Method::Nn, Method::Fc, Method::Lstm], &cfg).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.report.to_json(false), b.report.to_json(false));
    assert_eq!(a.report.records_csv(), b.report.records_csv());
    assert_eq!(a.lstm.unwrap().0.to_text(), b.lstm.unwrap().0.to_text());
    assert!(a.report.to_json(true).contains("seconds"));
}

#[test]
fn saved_models_reload() {
    let trace = sample_trajectory();
    let mut nn = NnConfig::default().build(&trace).unwrap();
    nn.fit(&trace).unwrap();
    assert_eq!(TransitionModel::from_csv(&nn.to_csv(), Fallback::ZeroRow).unwrap(), nn);

    let fc = fitted_fc(&trace, 0.01);
    let back = FuzzyTransitionModel::from_csv(&fc.to_csv()).unwrap();
    for &y in trace.samples.iter().step_by(37) {
        let (a, b) = (fc.predict(y).unwrap(), back.predict(y).unwrap());
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    let (model, _) = lstm::train(std::slice::from_ref(&trace), &tiny_lstm()).unwrap();
    let text = model.to_text();
    let reloaded = LstmModel::from_text(&text).unwrap();
    assert_eq!(reloaded.to_text(), text);
    let (a, b) = (model.predict_open_loop(&trace).unwrap(), reloaded.predict_open_loop(&trace).unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
}

#[test]
fn closed_loop_windows_tile_the_trace() {
    let sine = synth::reference_sine();
    let cfg = TrainConfig {
        epochs: 5,
        hidden_size: 6,
        ..TrainConfig::default()
    };
    let (model, _) = lstm::train(std::slice::from_ref(&sine), &cfg).unwrap();
    let lc = eval::evaluate_loops(&model, &sine, 40).unwrap();
    // Origins 40, 80, ..., 520: 13 windows of 40 targets.
    assert_eq!(lc.closed_records.len(), 13 * 40);
    assert_eq!(lc.open_records.len(), lc.closed_records.len());
    for (o, c) in lc.open_records.iter().zip(&lc.closed_records) {
        assert_eq!(o.origin_index + 1, c.origin_index + c.horizon_step);
    }
}
