//! `seqcast` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors (bad flags, bad config file,
//! invalid output names), 2 on data or model errors.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use seqcast::eval::{self, CompareConfig, ExperimentReport, Method, PredictionRecord, Protocol, TransitionPredictor};
use seqcast::fuzzy::FuzzyTransitionModel;
use seqcast::lstm::{self, LstmModel};
use seqcast::markov::{Fallback, TransitionModel};
use seqcast::trajectory::{self, Trajectory};

use config::CliConfig;
use plot::{ChartLabels, Series, MAX_SERIES};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SEQCAST_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<seqcast::Error> for CliError {
    fn from(e: seqcast::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "seqcast", version, about = "Velocity forecasting with Markov, fuzzy-coding and LSTM predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $SEQCAST_OUT, else ./out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct DataArgs {
    /// NGSIM-style records file or a `t_seconds,velocity_mps` trace. Defaults to the bundled sample.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Vehicle to extract from a records file [default: first vehicle].
    #[arg(long)]
    vehicle: Option<i64>,
    /// Multiplier from raw speed units to m/s.
    #[arg(long)]
    unit_scale: Option<f64>,
    /// Largest frame step kept within one trajectory.
    #[arg(long)]
    max_gap_frames: Option<i64>,
    /// Fail on the first malformed row instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args, Default)]
struct NnArgs {
    /// Grid spacing in m/s.
    #[arg(long)]
    spacing: Option<f64>,
    /// Prediction for unvisited states: zerorow, hold or uniform.
    #[arg(long, value_parser = parse_enum::<Fallback>)]
    fallback: Option<Fallback>,
}

#[derive(Debug, Args, Default)]
struct FcArgs {
    /// Width of the Gaussian fuzzy sets.
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of fuzzy sets [default: enough to cover the trace].
    #[arg(long)]
    sets: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct LstmArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    hidden_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract per-vehicle velocity traces from a records file.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Decimate to this sample period in seconds.
        #[arg(long)]
        resample: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a Markov transition matrix and write it as CSV.
    FitNn {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        nn: NnArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a fuzzy-coding transition matrix and write it as CSV.
    FitFc {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        fc: FcArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Train an LSTM and write the model and its training curve.
    TrainLstm {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        lstm: LstmArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Predict a trace with a saved model.
    Predict {
        /// Model file written by fit-nn, fit-fc or train-lstm.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Steps ahead from each origin.
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        /// Fallback for NN models.
        #[arg(long, value_parser = parse_enum::<Fallback>)]
        fallback: Option<Fallback>,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated one-step prediction over the same trace, learning between rounds.
    Rounds {
        #[command(flatten)]
        data: DataArgs,
        /// nn or fc.
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        #[arg(long)]
        rounds: Option<usize>,
        /// batch or online.
        #[arg(long, value_parser = parse_enum::<Protocol>)]
        protocol: Option<Protocol>,
        #[command(flatten)]
        nn: NnArgs,
        #[command(flatten)]
        fc: FcArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Multi-step NN forecasting over several rounds.
    Horizon {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[command(flatten)]
        nn: NnArgs,
        #[command(flatten)]
        common: Common,
    },
    /// First-round one-step comparison of several methods on one trace.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated list of nn, fc, lstm.
        #[arg(long, value_delimiter = ',', value_parser = parse_method)]
        methods: Vec<Method>,
        /// batch or online, applied to nn and fc.
        #[arg(long, value_parser = parse_enum::<Protocol>)]
        protocol: Option<Protocol>,
        /// Skip timings.json (wall-clock seconds per method).
        #[arg(long)]
        no_timings: bool,
        #[command(flatten)]
        nn: NnArgs,
        #[command(flatten)]
        fc: FcArgs,
        #[command(flatten)]
        lstm: LstmArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Train one LSTM per training trace and score open and closed loop on an evaluation trace.
    Sensitivity {
        /// Training trace (repeatable).
        #[arg(long = "train")]
        train: Vec<PathBuf>,
        /// Evaluation trace.
        #[arg(long = "eval")]
        eval: Option<PathBuf>,
        /// Use seeded synthetic highway and urban training traces and a highway evaluation trace.
        #[arg(long, conflicts_with_all = ["train", "eval"])]
        synthetic: bool,
        #[arg(long)]
        closed_loop_horizon: Option<usize>,
        #[command(flatten)]
        lstm: LstmArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Render columns of a CSV file as an SVG line chart.
    Plot {
        /// CSV file with a header row.
        #[arg(long)]
        input: PathBuf,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "plot.svg")]
        output: String,
        /// Column used as x [default: first column].
        #[arg(long)]
        x: Option<String>,
        /// Columns to plot [default: every other numeric column].
        #[arg(long = "y")]
        y: Vec<String>,
        #[arg(long, default_value = "")]
        title: String,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    toml::Value::String(s.to_ascii_lowercase())
        .try_into()
        .map_err(|_| format!("invalid value '{s}'"))
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: seqcast::Error| e.to_string())
}

/// Run the CLI on `argv` (program name first) and return the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Writes confined to one directory.
struct Output {
    dir: PathBuf,
}

impl Output {
    fn resolve(flag: Option<&Path>, cfg: &CliConfig) -> Self {
        let dir = flag
            .map(Path::to_path_buf)
            .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Self { dir }
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        check_file_name(name)?;
        fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Data(format!("{}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Output names must be plain file names so nothing lands outside the output directory.
fn check_file_name(name: &str) -> CliResult<()> {
    let plain = Path::new(name).file_name().map(|f| f == name).unwrap_or(false);
    if !plain || name.contains(['/', '\\']) || name == "." || name == ".." {
        return Err(CliError::Usage(format!(
            "output name '{name}' must be a plain file name"
        )));
    }
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn load_config(common: &Common) -> CliResult<(CliConfig, Output)> {
    let cfg = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            CliConfig::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
        }
        None => CliConfig::default(),
    };
    let out = Output::resolve(common.out.as_deref(), &cfg);
    Ok((cfg, out))
}

impl DataArgs {
    fn apply(&self, cfg: &mut CliConfig) {
        let ing = &mut cfg.ingest;
        if let Some(v) = self.vehicle {
            ing.vehicle = Some(v);
        }
        if let Some(s) = self.unit_scale {
            ing.unit_scale = s;
        }
        if let Some(g) = self.max_gap_frames {
            ing.max_gap_frames = g;
        }
        ing.strict |= self.strict;
    }
}

impl NnArgs {
    fn apply(&self, cfg: &mut CliConfig) {
        if let Some(s) = self.spacing {
            cfg.nn.spacing = s;
        }
        if let Some(f) = self.fallback {
            cfg.nn.fallback = f;
        }
    }
}

impl FcArgs {
    fn apply(&self, cfg: &mut CliConfig) {
        if let Some(s) = self.sigma {
            cfg.fc.sigma = s;
        }
        if self.sets.is_some() {
            cfg.fc.sets = self.sets;
        }
    }
}

impl LstmArgs {
    fn apply(&self, cfg: &mut CliConfig) {
        let l = &mut cfg.lstm;
        if let Some(v) = self.epochs {
            l.epochs = v;
        }
        if let Some(v) = self.hidden_size {
            l.hidden_size = v;
        }
        if let Some(v) = self.learning_rate {
            l.learning_rate = v;
        }
        if let Some(v) = self.seed {
            l.seed = v;
        }
    }
}

fn is_trace_csv(text: &str) -> bool {
    text.lines()
        .next()
        .map(|l| l.trim_start_matches('\u{feff}').trim().starts_with("t_seconds"))
        .unwrap_or(false)
}

/// Load one velocity trace: a trace CSV as is, or the longest run of the
/// selected vehicle from a records file.
fn load_trace(path: Option<&Path>, cfg: &CliConfig) -> CliResult<Trajectory> {
    let text = match path {
        Some(p) => read_text(p)?,
        None => seqcast::SAMPLE_TRACE_CSV.to_string(),
    };
    if is_trace_csv(&text) {
        return Ok(Trajectory::from_csv(&text)?);
    }
    let ingest = cfg.ingest.to_ingest_config();
    ingest.validate()?;
    let parsed = trajectory::parse_records_reporting(&text, &ingest)?;
    if !parsed.skipped.is_empty() {
        eprintln!("warning: skipped {} malformed row(s)", parsed.skipped.len());
    }
    let vehicle = match (cfg.ingest.vehicle, path) {
        (Some(v), _) => v,
        (None, None) => seqcast::SAMPLE_VEHICLE,
        (None, Some(_)) => *trajectory::vehicle_ids(&parsed.records)
            .first()
            .ok_or(seqcast::Error::EmptyInput)?,
    };
    let runs = trajectory::extract_trajectory(&parsed.records, vehicle, &ingest)?;
    Ok(runs.into_iter().max_by_key(Trajectory::len).expect("extract returns at least one run"))
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Ingest { data, resample, common } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            cmd_ingest(&data, resample, &cfg, &out)
        }
        Command::FitNn { data, nn, common } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            nn.apply(&mut cfg);
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let mut model = cfg.nn.build(&trace)?;
            model.fit(&trace)?;
            let path = out.write("nn_transitions.csv", &model.to_csv())?;
            println!(
                "states\t{}\ntransitions\t{}\nwrote\t{}",
                model.num_states(),
                model.total_transitions(),
                path.display()
            );
            Ok(())
        }
        Command::FitFc { data, fc, common } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            fc.apply(&mut cfg);
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let mut model = cfg.fc.build(&trace)?;
            model.fit(&trace)?;
            let path = out.write("fc_transitions.csv", &model.to_csv())?;
            println!("sets\t{}\nwrote\t{}", model.num_sets(), path.display());
            Ok(())
        }
        Command::TrainLstm { data, lstm, common } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            lstm.apply(&mut cfg);
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let (model, curve) = lstm::train(std::slice::from_ref(&trace), &cfg.lstm)?;
            out.write("lstm.model", &model.to_text())?;
            out.write("training_curve.csv", &curve.to_csv())?;
            let iters: Vec<f64> = (1..=curve.len()).map(|k| k as f64).collect();
            let svg = plot::plot_series(
                &[Series::new("rmse", iters.iter().copied().zip(curve.rmse.iter().copied()).collect())],
                &ChartLabels {
                    title: "training curve".into(),
                    x: "iteration".into(),
                    y: "RMSE [m/s]".into(),
                },
            )?;
            out.write("training_curve.svg", &svg)?;
            println!(
                "epochs\t{}\nfinal_loss\t{:.6}\nfinal_rmse\t{:.6}\nwrote\t{}",
                curve.len(),
                curve.loss.last().copied().unwrap_or(f64::NAN),
                curve.rmse.last().copied().unwrap_or(f64::NAN),
                out.dir.display()
            );
            Ok(())
        }
        Command::Predict {
            model,
            data,
            horizon,
            fallback,
            common,
        } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            if let Some(f) = fallback {
                cfg.nn.fallback = f;
            }
            cmd_predict(&model, &data, horizon, &cfg, &out)
        }
        Command::Rounds {
            data,
            method,
            rounds,
            protocol,
            nn,
            fc,
            common,
        } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            nn.apply(&mut cfg);
            fc.apply(&mut cfg);
            let rounds = rounds.unwrap_or(cfg.experiment.rounds);
            let protocol = protocol.unwrap_or(cfg.experiment.protocol);
            let method = method.unwrap_or(Method::Nn);
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let predictor = match method {
                Method::Nn => TransitionPredictor::Nn(cfg.nn.build(&trace)?),
                Method::Fc => TransitionPredictor::Fc(cfg.fc.build(&trace)?),
                Method::Lstm => {
                    return Err(CliError::Usage("rounds supports --method nn or fc".into()));
                }
            };
            let (report, _) = eval::run_rounds(predictor, &trace, rounds, protocol)?;
            write_report(&out, &report, false)?;
            let mut series = vec![Series::sampled("observed", &trace.samples, trace.sample_period)];
            for r in report.methods[0].rounds.iter().take(MAX_SERIES - 1) {
                series.push(prediction_series(&format!("round {}", r.round), &r.records, trace.sample_period));
            }
            write_chart(&out, "rounds.svg", &series, "one-step prediction by round", "t [s]", "velocity [m/s]")?;
            print!("{}", report.rmse_table());
            Ok(())
        }
        Command::Horizon {
            data,
            horizon,
            rounds,
            nn,
            common,
        } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            nn.apply(&mut cfg);
            let horizon = horizon.unwrap_or(cfg.experiment.horizon);
            let rounds = rounds.unwrap_or(cfg.experiment.rounds);
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let (report, _) = eval::run_horizon(cfg.nn.build(&trace)?, &trace, horizon, rounds)?;
            write_report(&out, &report, false)?;
            let series: Vec<Series> = report.methods[0]
                .rounds
                .iter()
                .take(MAX_SERIES)
                .map(|r| {
                    let pts = r.per_step_rmse.iter().enumerate().map(|(k, &e)| ((k + 1) as f64, e)).collect();
                    Series::new(format!("round {}", r.round), pts)
                })
                .collect();
            write_chart(&out, "horizon.svg", &series, "RMSE by prediction step", "step", "RMSE [m/s]")?;
            println!("round\tstep\trmse");
            for r in &report.methods[0].rounds {
                for (k, e) in r.per_step_rmse.iter().enumerate() {
                    println!("{}\t{}\t{:.6}", r.round, k + 1, e);
                }
            }
            Ok(())
        }
        Command::Compare {
            data,
            methods,
            protocol,
            no_timings,
            nn,
            fc,
            lstm,
            common,
        } => {
            let (mut cfg, out) = load_config(&common)?;
            data.apply(&mut cfg);
            nn.apply(&mut cfg);
            fc.apply(&mut cfg);
            lstm.apply(&mut cfg);
            let methods = if methods.is_empty() { cfg.experiment.methods.clone() } else { methods };
            let trace = load_trace(data.data.as_deref(), &cfg)?;
            let compare_cfg = CompareConfig {
                nn: cfg.nn.clone(),
                fc: cfg.fc.clone(),
                lstm: cfg.lstm.clone(),
                protocol: protocol.unwrap_or(cfg.experiment.compare_protocol),
            };
            let cmp = eval::compare_methods(&trace, &methods, &compare_cfg)?;
            write_report(&out, &cmp.report, !no_timings)?;
            if let Some(m) = &cmp.nn {
                out.write("nn_transitions.csv", &m.to_csv())?;
            }
            if let Some(m) = &cmp.fc {
                out.write("fc_transitions.csv", &m.to_csv())?;
            }
            if let Some((m, curve)) = &cmp.lstm {
                out.write("lstm.model", &m.to_text())?;
                out.write("training_curve.csv", &curve.to_csv())?;
            }
            let mut series = vec![Series::sampled("observed", &trace.samples, trace.sample_period)];
            for m in &cmp.report.methods {
                series.push(prediction_series(&m.label, &m.rounds[0].records, trace.sample_period));
            }
            write_chart(&out, "compare.svg", &series, "one-step prediction", "t [s]", "velocity [m/s]")?;
            print!("{}", cmp.report.rmse_table());
            Ok(())
        }
        Command::Sensitivity {
            train,
            eval: eval_path,
            synthetic,
            closed_loop_horizon,
            lstm,
            common,
        } => {
            let (mut cfg, out) = load_config(&common)?;
            lstm.apply(&mut cfg);
            let horizon = closed_loop_horizon.unwrap_or(cfg.experiment.closed_loop_horizon);
            let (sets, eval_trace) = if synthetic {
                use seqcast::synth::{regime_trace, Regime};
                (
                    vec![regime_trace(Regime::Highway, 1, 900), regime_trace(Regime::Urban, 2, 900)],
                    regime_trace(Regime::Highway, 3, 600),
                )
            } else {
                let eval_path = eval_path
                    .ok_or_else(|| CliError::Usage("sensitivity needs --eval (or --synthetic)".into()))?;
                if train.is_empty() {
                    return Err(CliError::Usage("sensitivity needs at least one --train (or --synthetic)".into()));
                }
                let sets = train
                    .iter()
                    .map(|p| load_trace(Some(p), &cfg))
                    .collect::<CliResult<Vec<_>>>()?;
                (sets, load_trace(Some(&eval_path), &cfg)?)
            };
            let result = eval::lstm_data_sensitivity(&sets, &eval_trace, &cfg.lstm, horizon)?;
            write_report(&out, &result.report, false)?;
            let dt = eval_trace.sample_period;
            let mut series = vec![Series::sampled("observed", &eval_trace.samples, dt)];
            for (k, pair) in result.pairs.iter().enumerate().take(MAX_SERIES - 1) {
                series.push(prediction_series(&format!("set {k} closed loop"), &pair.closed_records, dt));
            }
            write_chart(&out, "sensitivity.svg", &series, "closed-loop prediction", "t [s]", "velocity [m/s]")?;
            println!("set\topen_rmse\tclosed_rmse");
            for (k, pair) in result.pairs.iter().enumerate() {
                println!("{k}\t{:.6}\t{:.6}", pair.open_loop_rmse, pair.closed_loop_rmse);
            }
            Ok(())
        }
        Command::Plot {
            input,
            output,
            x,
            y,
            title,
            common,
        } => {
            let (_, out) = load_config(&common)?;
            check_file_name(&output)?;
            let text = read_text(&input)?;
            let (x_label, series) = csv_series(&text, x.as_deref(), &y)?;
            let svg = plot::plot_series(
                &series,
                &ChartLabels {
                    title,
                    x: x_label,
                    y: String::new(),
                },
            )?;
            let path = out.write(&output, &svg)?;
            println!("wrote\t{}", path.display());
            Ok(())
        }
    }
}

fn cmd_ingest(data: &DataArgs, resample: Option<f64>, cfg: &CliConfig, out: &Output) -> CliResult<()> {
    let text = match &data.data {
        Some(p) => read_text(p)?,
        None => seqcast::SAMPLE_TRACE_CSV.to_string(),
    };
    let ingest = cfg.ingest.to_ingest_config();
    ingest.validate()?;
    let parsed = trajectory::parse_records_reporting(&text, &ingest)?;
    for s in &parsed.skipped {
        eprintln!("warning: skipped row: {s}");
    }
    let vehicles = match cfg.ingest.vehicle {
        Some(v) => vec![v],
        None => trajectory::vehicle_ids(&parsed.records),
    };
    println!("vehicle\trun\tsamples\tperiod_s\tfile");
    for v in vehicles {
        let runs = trajectory::extract_trajectory(&parsed.records, v, &ingest)?;
        let many = runs.len() > 1;
        for (k, run) in runs.into_iter().enumerate() {
            let run = match resample {
                Some(p) => trajectory::resample_uniform(&run, p)?,
                None => run,
            };
            let name = if many { format!("vehicle_{v}_run{k}.csv") } else { format!("vehicle_{v}.csv") };
            out.write(&name, &run.to_csv())?;
            println!("{v}\t{k}\t{}\t{}\t{name}", run.len(), run.sample_period);
        }
    }
    Ok(())
}

enum LoadedModel {
    Nn(TransitionModel),
    Fc(FuzzyTransitionModel),
    Lstm(Box<LstmModel>),
}

fn load_model(path: &Path, fallback: Fallback) -> CliResult<LoadedModel> {
    if !path.exists() {
        return Err(CliError::Data(format!("model file not found: {}", path.display())));
    }
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    let bad = |e: seqcast::Error| CliError::Data(format!("{}: {e}", path.display()));
    if first == lstm::HEADER {
        Ok(LoadedModel::Lstm(Box::new(LstmModel::from_text(&text).map_err(bad)?)))
    } else if first.starts_with("# x_") {
        Ok(LoadedModel::Nn(TransitionModel::from_csv(&text, fallback).map_err(bad)?))
    } else if first.starts_with("# M=") {
        Ok(LoadedModel::Fc(FuzzyTransitionModel::from_csv(&text).map_err(bad)?))
    } else {
        Err(CliError::Data(format!("{}: unrecognized model format", path.display())))
    }
}

fn cmd_predict(model: &Path, data: &DataArgs, horizon: usize, cfg: &CliConfig, out: &Output) -> CliResult<()> {
    if horizon < 1 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    let model = load_model(model, cfg.nn.fallback)?;
    let trace = load_trace(data.data.as_deref(), cfg)?;
    let y = &trace.samples;
    if y.len() < 2 {
        return Err(seqcast::Error::InsufficientData("trace needs at least two samples".into()).into());
    }
    let mut records = Vec::new();
    let mut push = |origin: usize, preds: Vec<f64>| {
        for (k, p) in preds.into_iter().enumerate() {
            records.push(PredictionRecord {
                origin_index: origin,
                horizon_step: k + 1,
                predicted: p,
                observed: y[origin + k + 1],
            });
        }
    };
    let label = match &model {
        LoadedModel::Nn(m) => {
            for origin in 0..y.len() - 1 {
                push(origin, m.predict_multistep(y[origin], horizon.min(y.len() - 1 - origin))?);
            }
            Method::Nn
        }
        LoadedModel::Fc(m) => {
            for origin in 0..y.len() - 1 {
                let mut cur = y[origin];
                let mut preds = Vec::new();
                for _ in 0..horizon.min(y.len() - 1 - origin) {
                    cur = m.predict(cur)?;
                    preds.push(cur);
                }
                push(origin, preds);
            }
            Method::Fc
        }
        LoadedModel::Lstm(m) if horizon == 1 => {
            for (k, p) in m.predict_open_loop(&trace)?.into_iter().enumerate() {
                push(k, vec![p]);
            }
            Method::Lstm
        }
        LoadedModel::Lstm(m) => {
            records = eval::evaluate_loops(m, &trace, horizon)?.closed_records;
            Method::Lstm
        }
    };
    let mut csv = String::from("origin,step,predicted,observed\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            r.origin_index, r.horizon_step, r.predicted, r.observed
        ));
    }
    let path = out.write("predictions.csv", &csv)?;
    let (p, o): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.predicted, r.observed)).unzip();
    println!(
        "model\t{}\nhorizon\t{horizon}\npredictions\t{}\nrmse\t{:.6}\nwrote\t{}",
        label,
        records.len(),
        eval::rmse(&p, &o)?,
        path.display()
    );
    Ok(())
}

fn write_report(out: &Output, report: &ExperimentReport, timings: bool) -> CliResult<()> {
    out.write("report.json", &report.to_json(false))?;
    out.write("predictions.csv", &report.records_csv())?;
    if timings {
        out.write("timings.json", &report.timings_json())?;
    }
    Ok(())
}

/// Series of one-step-ahead predictions placed at their target times.
fn prediction_series(name: &str, records: &[PredictionRecord], dt: f64) -> Series {
    Series::new(
        name,
        records
            .iter()
            .map(|r| ((r.origin_index + r.horizon_step) as f64 * dt, r.predicted))
            .collect(),
    )
}

fn write_chart(out: &Output, name: &str, series: &[Series], title: &str, x: &str, y: &str) -> CliResult<()> {
    let svg = plot::plot_series(
        series,
        &ChartLabels {
            title: title.into(),
            x: x.into(),
            y: y.into(),
        },
    )?;
    out.write(name, &svg)?;
    Ok(())
}

/// Numeric columns of a headed CSV as chart series against column `x`
/// (default: the first numeric column). Returns the x column name too.
fn csv_series(text: &str, x: Option<&str>, y: &[String]) -> CliResult<(String, Vec<Series>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or(seqcast::Error::EmptyInput)?
        .split(',')
        .map(str::trim)
        .collect();
    let rows: Vec<Vec<Option<f64>>> = lines
        .map(|l| l.split(',').map(|c| c.trim().parse::<f64>().ok()).collect())
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::Usage(format!("no column named '{name}'")))
    };
    let numeric = |j: usize| !rows.is_empty() && rows.iter().all(|r| r.get(j).copied().flatten().is_some());
    let xi = match x {
        Some(n) => col(n)?,
        None => (0..header.len())
            .find(|&j| numeric(j))
            .ok_or_else(|| CliError::Data("no numeric column to use as x".into()))?,
    };
    let ys: Vec<usize> = if y.is_empty() {
        (0..header.len()).filter(|&j| j != xi && numeric(j)).collect()
    } else {
        y.iter().map(|n| col(n)).collect::<CliResult<_>>()?
    };
    if ys.len() > MAX_SERIES {
        return Err(seqcast::Error::TooManySeries(ys.len()).into());
    }
    let series = ys
        .into_iter()
        .map(|j| {
            let pts = rows
                .iter()
                .filter_map(|r| Some((r.get(xi).copied().flatten()?, r.get(j).copied().flatten()?)))
                .collect();
            Series::new(header[j], pts)
        })
        .collect();
    Ok((header[xi].to_string(), series))
}
