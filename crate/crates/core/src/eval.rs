//! Experiment harness: RMSE scoring, repeated online-learning rounds,
//! multi-step horizons, method comparison and LSTM training-data
//! sensitivity.
//!
//! All experiments produce an [`ExperimentReport`], which serializes to JSON
//! (`method -> rounds -> {rmse, per_step_rmse, seconds}`) and to a flat CSV
//! of [`PredictionRecord`]s.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{self, FuzzyPartition, FuzzyTransitionModel};
use crate::lstm::{self, LstmModel, TrainConfig, TrainingCurve};
use crate::markov::{self, build_state_space, Fallback, TransitionModel};
use crate::trajectory::Trajectory;
use crate::util::digest_f64;

/// Root mean square error between two equally long series.
pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: observed.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o) * (p - o)).sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nn,
    Fc,
    Lstm,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Nn => "nn",
            Method::Fc => "fc",
            Method::Lstm => "lstm",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nn" => Ok(Method::Nn),
            "fc" => Ok(Method::Fc),
            "lstm" => Ok(Method::Lstm),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}' (expected nn, fc or lstm)"))),
        }
    }
}

/// Settings for the nearest-neighbourhood predictor. Unset grid bounds are
/// taken from the trace so that the grid coincides with the fuzzy centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnConfig {
    pub spacing: f64,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub fallback: Fallback,
}

impl Default for NnConfig {
    fn default() -> Self {
        Self {
            spacing: markov::DEFAULT_SPACING,
            v_min: None,
            v_max: None,
            fallback: Fallback::ZeroRow,
        }
    }
}

impl NnConfig {
    pub fn build(&self, trajectory: &Trajectory) -> Result<TransitionModel> {
        let lo = self.v_min.unwrap_or(fuzzy::standard_center(1));
        let hi = self
            .v_max
            .unwrap_or_else(|| max_sample(trajectory))
            .max(lo + self.spacing);
        Ok(TransitionModel::new(build_state_space(lo, hi, self.spacing)?, self.fallback))
    }
}

/// Settings for the fuzzy-coding predictor. `sets = None` picks the smallest
/// standard partition covering the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FcConfig {
    pub sigma: f64,
    pub sets: Option<usize>,
    pub quad_step: f64,
    pub clamp: bool,
}

impl Default for FcConfig {
    fn default() -> Self {
        Self {
            sigma: fuzzy::DEFAULT_SIGMA,
            sets: None,
            quad_step: fuzzy::DEFAULT_QUAD_STEP,
            clamp: false,
        }
    }
}

impl FcConfig {
    pub fn build(&self, trajectory: &Trajectory) -> Result<FuzzyTransitionModel> {
        let mut partition = match self.sets {
            Some(m) => FuzzyPartition::new(m, self.sigma)?,
            None => FuzzyPartition::covering(max_sample(trajectory), self.sigma)?,
        }
        .with_quad_step(self.quad_step)?;
        partition.clamp = self.clamp;
        Ok(FuzzyTransitionModel::new(partition))
    }
}

fn max_sample(t: &Trajectory) -> f64 {
    t.samples.iter().copied().fold(0.0, f64::max)
}

/// How a round interleaves prediction and fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Predict the whole trace with the current model, then fit the trace.
    #[default]
    Batch,
    /// After each one-step prediction, fit the transition just observed.
    Online,
}

/// A transition-probability predictor (NN or FC) under a round protocol.
#[derive(Debug, Clone)]
pub enum TransitionPredictor {
    Nn(TransitionModel),
    Fc(FuzzyTransitionModel),
}

impl TransitionPredictor {
    pub fn method(&self) -> Method {
        match self {
            TransitionPredictor::Nn(_) => Method::Nn,
            TransitionPredictor::Fc(_) => Method::Fc,
        }
    }

    /// One-step prediction. An FC model with no counts yet predicts 0, the
    /// same value a zero-initialized NN matrix gives.
    pub fn predict(&self, current: f64) -> Result<f64> {
        match self {
            TransitionPredictor::Nn(m) => m.predict_expectation(current),
            TransitionPredictor::Fc(m) => match m.predict(current) {
                Err(Error::UnfittedModel) => Ok(0.0),
                other => other,
            },
        }
    }

    pub fn observe(&mut self, from: f64, to: f64) -> Result<()> {
        match self {
            TransitionPredictor::Nn(m) => m.observe(from, to),
            TransitionPredictor::Fc(m) => m.observe(from, to),
        }
    }

    pub fn fit(&mut self, trajectory: &Trajectory) -> Result<()> {
        match self {
            TransitionPredictor::Nn(m) => m.fit(trajectory),
            TransitionPredictor::Fc(m) => m.fit(trajectory),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub origin_index: usize,
    pub horizon_step: usize,
    pub predicted: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    /// RMSE over every record of the round.
    pub rmse: f64,
    /// RMSE per horizon step (a single entry for one-step evaluation).
    pub per_step_rmse: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<PredictionRecord>,
}

impl RoundReport {
    fn from_records(round: usize, records: Vec<PredictionRecord>) -> Result<Self> {
        let steps = records.iter().map(|r| r.horizon_step).max().unwrap_or(0);
        let mut per_step = Vec::with_capacity(steps);
        for s in 1..=steps {
            let (p, o): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.horizon_step == s)
                .map(|r| (r.predicted, r.observed))
                .unzip();
            per_step.push(rmse(&p, &o)?);
        }
        let (p, o): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.predicted, r.observed)).unzip();
        Ok(Self {
            round,
            rmse: rmse(&p, &o)?,
            per_step_rmse: per_step,
            records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub label: String,
    pub rounds: Vec<RoundReport>,
    /// Wall-clock seconds for the method's whole protocol.
    pub seconds: f64,
    /// SHA-256 of the evaluation inputs the method consumed.
    pub input_digest: String,
}

impl MethodReport {
    pub fn round_rmse(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.rmse).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub methods: Vec<MethodReport>,
    pub config: serde_json::Value,
}

#[derive(Serialize)]
struct RoundJson<'a> {
    round: usize,
    rmse: f64,
    per_step_rmse: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

#[derive(Serialize)]
struct MethodJson<'a> {
    input_digest: &'a str,
    rounds: Vec<RoundJson<'a>>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    experiment: &'a str,
    config: &'a serde_json::Value,
    methods: BTreeMap<&'a str, MethodJson<'a>>,
}

impl ExperimentReport {
    pub fn method(&self, label: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.label == label)
    }

    /// JSON document `{experiment, config, methods: {label: {input_digest,
    /// rounds: [{round, rmse, per_step_rmse, seconds}]}}}`. With
    /// `include_timing` off the `seconds` keys are omitted, which makes the
    /// document reproducible byte for byte.
    pub fn to_json(&self, include_timing: bool) -> String {
        let methods = self
            .methods
            .iter()
            .map(|m| {
                let per_round = m.seconds / m.rounds.len().max(1) as f64;
                let rounds = m
                    .rounds
                    .iter()
                    .map(|r| RoundJson {
                        round: r.round,
                        rmse: r.rmse,
                        per_step_rmse: &r.per_step_rmse,
                        seconds: include_timing.then_some(per_round),
                    })
                    .collect();
                (
                    m.label.as_str(),
                    MethodJson {
                        input_digest: &m.input_digest,
                        rounds,
                    },
                )
            })
            .collect();
        let doc = ReportJson {
            experiment: &self.experiment,
            config: &self.config,
            methods,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    /// Wall-clock seconds per method label.
    pub fn timings_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.methods.iter().map(|m| (m.label.as_str(), m.seconds)).collect();
        let mut s = serde_json::to_string_pretty(&map).expect("timings serialize");
        s.push('\n');
        s
    }

    /// Flat CSV: `method,round,origin,step,predicted,observed`.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("method,round,origin,step,predicted,observed\n");
        for m in &self.methods {
            for r in &m.rounds {
                for rec in &r.records {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:.6},{:.6}",
                        m.label, r.round, rec.origin_index, rec.horizon_step, rec.predicted, rec.observed
                    );
                }
            }
        }
        out
    }

    /// Plain-text RMSE table, one row per method and round.
    pub fn rmse_table(&self) -> String {
        let mut out = String::from("method\tround\trmse\n");
        for m in &self.methods {
            for r in &m.rounds {
                let _ = writeln!(out, "{}\t{}\t{:.6}", m.label, r.round, r.rmse);
            }
        }
        out
    }
}

fn one_step_round(
    predictor: &mut TransitionPredictor,
    trajectory: &Trajectory,
    protocol: Protocol,
    round: usize,
) -> Result<RoundReport> {
    let y = &trajectory.samples;
    let mut records = Vec::with_capacity(y.len() - 1);
    for t in 1..y.len() {
        let predicted = predictor.predict(y[t - 1])?;
        records.push(PredictionRecord {
            origin_index: t - 1,
            horizon_step: 1,
            predicted,
            observed: y[t],
        });
        if protocol == Protocol::Online {
            predictor.observe(y[t - 1], y[t])?;
        }
    }
    if protocol == Protocol::Batch {
        predictor.fit(trajectory)?;
    }
    RoundReport::from_records(round, records)
}

fn require_pairs(trajectory: &Trajectory) -> Result<()> {
    if trajectory.len() < 2 {
        return Err(Error::InsufficientData("evaluation trace needs at least two samples".into()));
    }
    Ok(())
}

/// Repeated one-step prediction over the same trace, starting from an empty
/// model and learning between (batch) or within (online) rounds.
pub fn run_rounds(
    predictor: TransitionPredictor,
    trajectory: &Trajectory,
    rounds: usize,
    protocol: Protocol,
) -> Result<(ExperimentReport, TransitionPredictor)> {
    require_pairs(trajectory)?;
    if rounds < 1 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    let mut predictor = predictor;
    let method = predictor.method();
    let start = Instant::now();
    let reports = (1..=rounds)
        .map(|r| one_step_round(&mut predictor, trajectory, protocol, r))
        .collect::<Result<Vec<_>>>()?;
    let report = ExperimentReport {
        experiment: "rounds".into(),
        methods: vec![MethodReport {
            label: method.label().into(),
            rounds: reports,
            seconds: start.elapsed().as_secs_f64(),
            input_digest: digest_f64(&trajectory.samples),
        }],
        config: serde_json::json!({
            "rounds": rounds,
            "protocol": protocol,
            "samples": trajectory.len(),
        }),
    };
    Ok((report, predictor))
}

/// Multi-step NN forecasting from every origin, truncated near the end of the
/// trace, with fitting between rounds.
pub fn run_horizon(
    model: TransitionModel,
    trajectory: &Trajectory,
    horizon: usize,
    rounds: usize,
) -> Result<(ExperimentReport, TransitionModel)> {
    require_pairs(trajectory)?;
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    if rounds < 1 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    let y = &trajectory.samples;
    let mut model = model;
    let start = Instant::now();
    let mut reports = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let mut records = Vec::new();
        for origin in 0..y.len() - 1 {
            let steps = horizon.min(y.len() - 1 - origin);
            for (k, predicted) in model.predict_multistep(y[origin], steps)?.into_iter().enumerate() {
                records.push(PredictionRecord {
                    origin_index: origin,
                    horizon_step: k + 1,
                    predicted,
                    observed: y[origin + k + 1],
                });
            }
        }
        reports.push(RoundReport::from_records(round, records)?);
        model.fit(trajectory)?;
    }
    let report = ExperimentReport {
        experiment: "horizon".into(),
        methods: vec![MethodReport {
            label: Method::Nn.label().into(),
            rounds: reports,
            seconds: start.elapsed().as_secs_f64(),
            input_digest: digest_f64(y),
        }],
        config: serde_json::json!({
            "horizon": horizon,
            "rounds": rounds,
            "samples": y.len(),
            "fallback": model.fallback,
        }),
    };
    Ok((report, model))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub nn: NnConfig,
    pub fc: FcConfig,
    pub lstm: TrainConfig,
    /// Round protocol shared by NN and FC.
    pub protocol: Protocol,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            nn: NnConfig::default(),
            fc: FcConfig::default(),
            lstm: TrainConfig::default(),
            protocol: Protocol::Online,
        }
    }
}

/// Output of [`compare_methods`]: the report plus the fitted models for
/// inspection.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ExperimentReport,
    pub nn: Option<TransitionModel>,
    pub fc: Option<FuzzyTransitionModel>,
    pub lstm: Option<(LstmModel, TrainingCurve)>,
}

/// First-round one-step evaluation of each requested method on the same
/// trace. NN and FC start from empty counts; the LSTM is trained on the
/// trace and evaluated open loop.
pub fn compare_methods(trajectory: &Trajectory, methods: &[Method], config: &CompareConfig) -> Result<Comparison> {
    require_pairs(trajectory)?;
    let mut wanted: Vec<Method> = methods.to_vec();
    wanted.sort();
    wanted.dedup();
    if wanted.is_empty() {
        return Err(Error::InvalidConfig("no methods selected".into()));
    }

    let mut out = Comparison {
        report: ExperimentReport {
            experiment: "compare".into(),
            methods: Vec::new(),
            config: serde_json::to_value(config).expect("config serializes"),
        },
        nn: None,
        fc: None,
        lstm: None,
    };

    for method in wanted {
        // Each method receives its own copy of the evaluation input.
        let input = trajectory.clone();
        let digest = digest_f64(&input.samples);
        let start = Instant::now();
        let round = match method {
            Method::Nn | Method::Fc => {
                let mut predictor = if method == Method::Nn {
                    TransitionPredictor::Nn(config.nn.build(&input)?)
                } else {
                    TransitionPredictor::Fc(config.fc.build(&input)?)
                };
                let round = one_step_round(&mut predictor, &input, config.protocol, 1)?;
                match predictor {
                    TransitionPredictor::Nn(m) => out.nn = Some(m),
                    TransitionPredictor::Fc(m) => out.fc = Some(m),
                }
                round
            }
            Method::Lstm => {
                let (model, curve) = lstm::train(std::slice::from_ref(&input), &config.lstm)?;
                let preds = model.predict_open_loop(&input)?;
                let records = open_loop_records(&preds, &input.samples);
                out.lstm = Some((model, curve));
                RoundReport::from_records(1, records)?
            }
        };
        out.report.methods.push(MethodReport {
            label: method.label().into(),
            rounds: vec![round],
            seconds: start.elapsed().as_secs_f64(),
            input_digest: digest,
        });
    }
    Ok(out)
}

fn open_loop_records(preds: &[f64], samples: &[f64]) -> Vec<PredictionRecord> {
    preds
        .iter()
        .enumerate()
        .map(|(k, &p)| PredictionRecord {
            origin_index: k,
            horizon_step: 1,
            predicted: p,
            observed: samples[k + 1],
        })
        .collect()
}

/// Open- versus closed-loop accuracy of one model on one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopComparison {
    pub horizon: usize,
    /// One-step RMSE over the targets covered by the closed-loop windows.
    pub open_loop_rmse: f64,
    pub closed_loop_rmse: f64,
    pub open_records: Vec<PredictionRecord>,
    pub closed_records: Vec<PredictionRecord>,
}

/// Split the trace into consecutive windows of `horizon` targets. For each
/// window starting after origin `o` (o = horizon, 2*horizon, ...), the model
/// is warmed up on `samples[..=o]` and run closed loop; open-loop predictions
/// for the same targets are scored alongside.
pub fn evaluate_loops(model: &LstmModel, trace: &Trajectory, horizon: usize) -> Result<LoopComparison> {
    if horizon < 1 {
        return Err(Error::InvalidHorizon(horizon));
    }
    let y = &trace.samples;
    if y.len() < 2 * horizon + 1 {
        return Err(Error::InsufficientData(format!(
            "trace of {} samples too short for horizon {horizon}",
            y.len()
        )));
    }
    let open = model.predict_open_loop(trace)?;
    let mut open_records = Vec::new();
    let mut closed_records = Vec::new();
    let mut origin = horizon;
    while origin + horizon < y.len() {
        let preds = model.predict_closed_loop(&y[..=origin], horizon)?;
        for (k, p) in preds.into_iter().enumerate() {
            let target = origin + k + 1;
            closed_records.push(PredictionRecord {
                origin_index: origin,
                horizon_step: k + 1,
                predicted: p,
                observed: y[target],
            });
            open_records.push(PredictionRecord {
                origin_index: target - 1,
                horizon_step: 1,
                predicted: open[target - 1],
                observed: y[target],
            });
        }
        origin += horizon;
    }
    let score = |recs: &[PredictionRecord]| {
        let (p, o): (Vec<f64>, Vec<f64>) = recs.iter().map(|r| (r.predicted, r.observed)).unzip();
        rmse(&p, &o)
    };
    Ok(LoopComparison {
        horizon,
        open_loop_rmse: score(&open_records)?,
        closed_loop_rmse: score(&closed_records)?,
        open_records,
        closed_records,
    })
}

/// Default closed-loop horizon for sensitivity runs.
pub const DEFAULT_CLOSED_LOOP_HORIZON: usize = 40;

#[derive(Debug, Clone)]
pub struct Sensitivity {
    pub report: ExperimentReport,
    /// One entry per training set, in input order.
    pub pairs: Vec<LoopComparison>,
}

/// Train one LSTM per training set and score each on `eval_trace` in open
/// and closed loop. Report labels are `lstm[k]/open` and `lstm[k]/closed`.
pub fn lstm_data_sensitivity(
    train_sets: &[Trajectory],
    eval_trace: &Trajectory,
    config: &TrainConfig,
    horizon: usize,
) -> Result<Sensitivity> {
    if train_sets.is_empty() {
        return Err(Error::InsufficientData("no training sets".into()));
    }
    let digest = digest_f64(&eval_trace.samples);
    let mut methods = Vec::with_capacity(2 * train_sets.len());
    let mut pairs = Vec::with_capacity(train_sets.len());
    for (k, set) in train_sets.iter().enumerate() {
        let start = Instant::now();
        let (model, _) = lstm::train(std::slice::from_ref(set), config)?;
        let cmp = evaluate_loops(&model, eval_trace, horizon)?;
        let seconds = start.elapsed().as_secs_f64();
        for (suffix, records) in [("open", &cmp.open_records), ("closed", &cmp.closed_records)] {
            methods.push(MethodReport {
                label: format!("lstm[{k}]/{suffix}"),
                rounds: vec![RoundReport::from_records(1, records.clone())?],
                seconds,
                input_digest: digest.clone(),
            });
        }
        pairs.push(cmp);
    }
    Ok(Sensitivity {
        report: ExperimentReport {
            experiment: "sensitivity".into(),
            methods,
            config: serde_json::json!({
                "lstm": config,
                "horizon": horizon,
                "train_sets": train_sets.len(),
                "eval_samples": eval_trace.len(),
            }),
        },
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_basics() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0], &[1.0, 4.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[1.0, 3.0], &[2.0, 5.0]).unwrap(), rmse(&[2.0, 5.0], &[1.0, 3.0]).unwrap());
        assert_eq!(rmse(&[1.0], &[]), Err(Error::LengthMismatch { left: 1, right: 0 }));
        assert_eq!(rmse(&[], &[]), Err(Error::EmptyInput));
    }

    fn trace(samples: &[f64]) -> Trajectory {
        Trajectory::from_samples(samples.to_vec()).unwrap()
    }

    #[test]
    fn first_batch_round_of_zero_model_predicts_zero() {
        let t = trace(&[3.0, 4.0, 6.5, 7.0, 5.0, 4.0]);
        let nn = NnConfig::default().build(&t).unwrap();
        let (report, _) = run_rounds(TransitionPredictor::Nn(nn), &t, 1, Protocol::Batch).unwrap();
        let round = &report.methods[0].rounds[0];
        assert!(round.records.iter().all(|r| r.predicted == 0.0));
        let tail = &t.samples[1..];
        let qm = (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
        assert!((round.rmse - qm).abs() < 1e-12);
        assert_eq!(report.methods[0].rounds.len(), 1);
    }

    #[test]
    fn online_protocol_learns_within_round() {
        let t = trace(&[3.0, 3.0, 3.0, 3.0]);
        let nn = NnConfig::default().build(&t).unwrap();
        let (report, _) = run_rounds(TransitionPredictor::Nn(nn), &t, 1, Protocol::Online).unwrap();
        let preds: Vec<f64> = report.methods[0].rounds[0].records.iter().map(|r| r.predicted).collect();
        // 3.0 snaps to the 3.75 state; it is unseen at the first step only.
        assert_eq!(preds, vec![0.0, 3.75, 3.75]);
    }

    #[test]
    fn unfitted_fc_predicts_zero_in_harness() {
        let t = trace(&[3.0, 4.0]);
        let fc = TransitionPredictor::Fc(FcConfig::default().build(&t).unwrap());
        assert_eq!(fc.predict(3.0).unwrap(), 0.0);
    }

    #[test]
    fn horizon_one_matches_rounds() {
        let t = trace(&[3.0, 4.0, 6.5, 7.0, 5.0, 4.0, 2.0, 2.2, 3.9]);
        let nn = NnConfig::default().build(&t).unwrap();
        let (rounds, _) = run_rounds(TransitionPredictor::Nn(nn.clone()), &t, 3, Protocol::Batch).unwrap();
        let (horizon, _) = run_horizon(nn, &t, 1, 3).unwrap();
        assert_eq!(rounds.methods[0].round_rmse(), horizon.methods[0].round_rmse());
    }

    #[test]
    fn horizon_truncates_near_end() {
        let t = trace(&[3.0, 4.0, 6.5, 7.0, 5.0]);
        let nn = NnConfig::default().build(&t).unwrap();
        let (report, _) = run_horizon(nn, &t, 3, 1).unwrap();
        let recs = &report.methods[0].rounds[0].records;
        // Origins 0,1 get 3 steps, origin 2 gets 2, origin 3 gets 1.
        assert_eq!(recs.len(), 3 + 3 + 2 + 1);
        assert!(recs.iter().all(|r| r.observed == t.samples[r.origin_index + r.horizon_step]));
        assert_eq!(report.methods[0].rounds[0].per_step_rmse.len(), 3);
    }

    #[test]
    fn compare_single_method() {
        let t = trace(&[3.0, 4.0, 6.5, 7.0, 5.0]);
        let c = compare_methods(&t, &[Method::Nn], &CompareConfig::default()).unwrap();
        assert_eq!(c.report.methods.len(), 1);
        assert!(c.nn.is_some() && c.fc.is_none());
    }

    #[test]
    fn json_without_timing_is_reproducible() {
        let t = trace(&[3.0, 4.0, 6.5, 7.0, 5.0]);
        let a = compare_methods(&t, &[Method::Nn, Method::Fc], &CompareConfig::default()).unwrap();
        let b = compare_methods(&t, &[Method::Fc, Method::Nn], &CompareConfig::default()).unwrap();
        assert_eq!(a.report.to_json(false), b.report.to_json(false));
        let json: serde_json::Value = serde_json::from_str(&a.report.to_json(true)).unwrap();
        assert!(json["methods"]["nn"]["rounds"][0]["seconds"].is_number());
        assert!(json["methods"]["fc"]["rounds"][0]["per_step_rmse"].is_array());
    }

    #[test]
    fn records_csv_layout() {
        let t = trace(&[3.0, 4.0, 6.5]);
        let nn = NnConfig::default().build(&t).unwrap();
        let (report, _) = run_rounds(TransitionPredictor::Nn(nn), &t, 1, Protocol::Batch).unwrap();
        assert_eq!(
            report.records_csv(),
            "method,round,origin,step,predicted,observed\nnn,1,0,1,0.000000,4.000000\nnn,1,1,1,0.000000,6.500000\n"
        );
    }

    #[test]
    fn method_parsing() {
        assert_eq!("NN".parse::<Method>().unwrap(), Method::Nn);
        assert!("kalman".parse::<Method>().is_err());
    }
}
