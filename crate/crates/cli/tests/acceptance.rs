//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Run with `cargo test -p seqcast-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqcast::check::{lstm_gradient_check, markov_path_expectation};
use seqcast::eval::{self, FcConfig, NnConfig, Protocol, TransitionPredictor, DEFAULT_CLOSED_LOOP_HORIZON};
use seqcast::fuzzy::{standard_center, FuzzyPartition, FuzzyTransitionModel};
use seqcast::lstm::{self, LstmModel, LstmParams, TrainConfig};
use seqcast::markov::{build_state_space, Fallback, StateSpace, TransitionModel};
use seqcast::synth::{self, Regime};
use seqcast::{sample_trajectory, Trajectory};

// Pinned tolerances and limits.
const ORACLE_TOL: f64 = 1e-10;
const ORACLE_MODELS: usize = 25;
const ORACLE_MAX_STATES: usize = 5;
const ORACLE_MAX_HORIZON: usize = 4;
const ORACLE_BUDGET: Duration = Duration::from_secs(1);

const STOCHASTIC_TOL: f64 = 1e-12;
const STOCHASTIC_TRAJECTORIES: usize = 100;

const GRAD_INSTANCES: u64 = 5;
const GRAD_MAX_HIDDEN: usize = 8;
const GRAD_MAX_LEN: usize = 10;
const GRAD_STEP: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-5;
const GRAD_FLOOR: f64 = 1e-4;
const GRAD_BUDGET: Duration = Duration::from_secs(10);

const SINE_RMSE_MAX: f64 = 0.25;
const SINE_BUDGET: Duration = Duration::from_secs(120);

const ROUND3_REL_TOL: f64 = 0.10;

const TIMING_REPEATS: usize = 5;

const CRISP_SIGMA: f64 = 0.05;
const CRISP_TOL: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..ORACLE_MODELS {
        let m = rng.gen_range(2..=ORACLE_MAX_STATES);
        let mut grid = vec![rng.gen_range(0.0..5.0)];
        for _ in 1..m {
            let next = grid.last().unwrap() + rng.gen_range(0.5..4.0);
            grid.push(next);
        }
        let counts = (0..m * m).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..30) }).collect();
        let fallback = [Fallback::ZeroRow, Fallback::Hold, Fallback::Uniform][k % 3];
        let model = TransitionModel::from_counts(StateSpace::from_grid(grid.clone()).unwrap(), counts, fallback).unwrap();
        for (from, &x) in grid.iter().enumerate() {
            let fast = model.predict_multistep(x, ORACLE_MAX_HORIZON).unwrap();
            for (n, v) in fast.iter().enumerate() {
                worst = worst.max((v - markov_path_expectation(&model, from, n + 1)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= ORACLE_TOL && elapsed < ORACLE_BUDGET,
        format!("max |error| {worst:.2e} (tol {ORACLE_TOL:.0e}), {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut rows = 0;
    for _ in 0..STOCHASTIC_TRAJECTORIES {
        let n = rng.gen_range(2..300);
        let mut v: f64 = rng.gen_range(0.0..30.0);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                v = (v + rng.gen_range(-2.0..2.0)).clamp(0.0, 30.0);
                v
            })
            .collect();
        let t = Trajectory::from_samples(samples).unwrap();
        let mut nn = NnConfig::default().build(&t).unwrap();
        nn.fit(&t).unwrap();
        for (i, row) in nn.transition_matrix().iter().enumerate() {
            if nn.row_total(i) > 0 {
                worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
                rows += 1;
            }
        }
        let mut fc = FcConfig::default().build(&t).unwrap();
        fc.fit(&t).unwrap();
        for row in fc.transition_matrix().unwrap() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                worst = worst.max((s - 1.0).abs());
                rows += 1;
            }
        }
    }
    outcome(
        worst <= STOCHASTIC_TOL,
        format!("{rows} rows, max |sum - 1| {worst:.2e} (tol {STOCHASTIC_TOL:.0e})"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..GRAD_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let hidden = rng.gen_range(1..=GRAD_MAX_HIDDEN);
        let len = rng.gen_range(2..=GRAD_MAX_LEN);
        let mut p = LstmParams::init(1, hidden, 1, seed);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v += rng.gen_range(-0.3..0.3);
            }
        }
        let xs: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let ys: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let r = lstm_gradient_check(&p, &xs, &ys, GRAD_STEP, GRAD_FLOOR).unwrap();
        worst = worst.max(r.max_rel_error);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= GRAD_TOL && elapsed < GRAD_BUDGET,
        format!("max relative error {worst:.2e} (tol {GRAD_TOL:.0e}), {elapsed:.2?}"),
    )
}

fn criterion_4(sine: &Trajectory, model: &LstmModel, elapsed: Duration) -> Outcome {
    let preds = model.predict_open_loop(sine).unwrap();
    let err = eval::rmse(&preds, &sine.samples[1..]).unwrap();
    outcome(
        err <= SINE_RMSE_MAX && elapsed < SINE_BUDGET,
        format!("open-loop RMSE {err:.4} (max {SINE_RMSE_MAX}), trained in {elapsed:.2?}"),
    )
}

fn criterion_5(trace: &Trajectory) -> Outcome {
    let p = TransitionPredictor::Nn(NnConfig::default().build(trace).unwrap());
    let (report, _) = eval::run_rounds(p, trace, 3, Protocol::Batch).unwrap();
    let r = report.methods[0].round_rmse();
    let pass = r[1] < r[0] && (r[2] - r[1]).abs() <= ROUND3_REL_TOL * r[1];
    outcome(pass, format!("round RMSE {:.4} / {:.4} / {:.4}", r[0], r[1], r[2]))
}

fn criterion_6(trace: &Trajectory) -> Outcome {
    let cfg = eval::CompareConfig::default();
    let c = eval::compare_methods(trace, &[eval::Method::Nn, eval::Method::Fc], &cfg).unwrap();
    let nn = c.report.method("nn").unwrap().rounds[0].rmse;
    let fc = c.report.method("fc").unwrap().rounds[0].rmse;
    outcome(fc < nn, format!("round-1 RMSE fc {fc:.4} < nn {nn:.4}"))
}

fn criterion_7(trace: &Trajectory) -> Outcome {
    let time = |make: &dyn Fn() -> TransitionPredictor| {
        let mut total = Duration::ZERO;
        for _ in 0..TIMING_REPEATS {
            let p = make();
            let start = Instant::now();
            let _ = eval::run_rounds(p, trace, 3, Protocol::Online).unwrap();
            total += start.elapsed();
        }
        total
    };
    let nn = time(&|| TransitionPredictor::Nn(NnConfig::default().build(trace).unwrap()));
    let fc = time(&|| TransitionPredictor::Fc(FcConfig::default().build(trace).unwrap()));
    outcome(nn < fc, format!("nn {nn:.2?} < fc {fc:.2?} over {TIMING_REPEATS} runs"))
}

fn criterion_8(sine: &Trajectory, sine_model: &LstmModel, trace: &Trajectory) -> Outcome {
    let h = DEFAULT_CLOSED_LOOP_HORIZON;
    let (trace_model, _) = lstm::train(std::slice::from_ref(trace), &TrainConfig::default()).unwrap();
    let a = eval::evaluate_loops(sine_model, sine, h).unwrap();
    let b = eval::evaluate_loops(&trace_model, trace, h).unwrap();
    outcome(
        a.open_loop_rmse <= a.closed_loop_rmse && b.open_loop_rmse <= b.closed_loop_rmse,
        format!(
            "horizon {h}: sine open {:.4} <= closed {:.4}; sample trace open {:.4} <= closed {:.4}",
            a.open_loop_rmse, a.closed_loop_rmse, b.open_loop_rmse, b.closed_loop_rmse
        ),
    )
}

fn criterion_9() -> Outcome {
    let matched = synth::regime_trace(Regime::Highway, 1, 900);
    let mismatched = synth::regime_trace(Regime::Urban, 2, 900);
    let eval_trace = synth::regime_trace(Regime::Highway, 3, 600);
    let s = eval::lstm_data_sensitivity(
        &[matched, mismatched],
        &eval_trace,
        &TrainConfig::default(),
        DEFAULT_CLOSED_LOOP_HORIZON,
    )
    .unwrap();
    let (m, x) = (s.pairs[0].open_loop_rmse, s.pairs[1].open_loop_rmse);
    outcome(m < x, format!("open-loop RMSE matched {m:.4} < mismatched {x:.4}"))
}

fn criterion_10() -> Outcome {
    let m = 10;
    let centers: Vec<f64> = (1..=m).map(standard_center).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut i = m / 2;
    let samples: Vec<f64> = (0..1000)
        .map(|_| {
            let v = centers[i];
            i = (i as i64 + rng.gen_range(-1..=1)).clamp(0, m as i64 - 1) as usize;
            v
        })
        .collect();
    let t = Trajectory::from_samples(samples).unwrap();
    let mut fc = FuzzyTransitionModel::new(FuzzyPartition::new(m, CRISP_SIGMA).unwrap());
    fc.fit(&t).unwrap();
    let mut nn = TransitionModel::new(build_state_space(centers[0], centers[m - 1], 2.5).unwrap(), Fallback::ZeroRow);
    nn.fit(&t).unwrap();
    let mut worst = 0.0f64;
    for (k, &c) in centers.iter().enumerate() {
        if nn.row_total(k) > 0 {
            worst = worst.max((fc.predict(c).unwrap() - nn.predict_expectation(c).unwrap()).abs());
        }
    }
    outcome(
        worst <= CRISP_TOL,
        format!("sigma {CRISP_SIGMA}: max |fc - nn| {worst:.2e} (tol {CRISP_TOL:.0e})"),
    )
}

fn criterion_11() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_seqcast"))
            .args(args)
            .current_dir(dir.path())
            .env_remove("SEQCAST_OUT")
            .output()
            .unwrap()
            .status
            .success()
    };
    let tiny = ["--epochs", "5", "--hidden-size", "8", "--seed", "42"];
    let mut ok = true;
    for out in ["a", "b"] {
        let mut cmp = vec!["compare", "--methods", "nn,fc,lstm", "--out", out];
        cmp.extend(tiny);
        let train_out = format!("{out}/train");
        let mut train = vec!["train-lstm", "--out", train_out.as_str()];
        train.extend(tiny);
        ok &= run(&cmp) && run(&train);
    }
    let same = |f: &str| {
        let read = |d: &str| std::fs::read(Path::new(dir.path()).join(d).join(f)).ok();
        ok && read("a").is_some() && read("a") == read("b")
    };
    let files = ["report.json", "lstm.model", "train/lstm.model", "train/training_curve.csv"];
    let differing: Vec<&str> = files.iter().copied().filter(|f| !same(f)).collect();
    outcome(
        ok && differing.is_empty(),
        if differing.is_empty() {
            format!("{} files byte-identical across two runs", files.len())
        } else {
            format!("differ or missing: {differing:?}")
        },
    )
}

fn main() {
    let trace = sample_trajectory();
    let sine = synth::reference_sine();
    let start = Instant::now();
    let (sine_model, _) = lstm::train(std::slice::from_ref(&sine), &TrainConfig::default()).unwrap();
    let sine_time = start.elapsed();

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "markov multi-step matches path enumeration", criterion_1()),
        (2, "transition rows are stochastic", criterion_2()),
        (3, "LSTM gradients match finite differences", criterion_3()),
        (4, "LSTM converges on the sine", criterion_4(&sine, &sine_model, sine_time)),
        (5, "NN matures over rounds", criterion_5(&trace)),
        (6, "FC beats NN in round 1", criterion_6(&trace)),
        (7, "NN runs faster than FC", criterion_7(&trace)),
        (8, "open loop beats closed loop", criterion_8(&sine, &sine_model, &trace)),
        (9, "matched training data wins", criterion_9()),
        (10, "FC crisp limit equals NN", criterion_10()),
        (11, "CLI outputs are deterministic", criterion_11()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n:>2}: {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
