use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prognos_core::dataset::IngestConfig;
use prognos_core::{ExplainMethod, ForecasterChoice, PrescribeMode};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SEED: u64 = 7;
pub const PORT_ENV: &str = "PROGNOS_PORT";

#[derive(Debug, Parser)]
#[command(name = "prognos", version, about = "Train, explain and query RUL models over sensor windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic run-to-failure benchmark as CSV.
    Synth(SynthArgs),
    /// Select features, window, split and normalize a CSV into a data directory.
    Ingest(IngestArgs),
    /// Train the predictor and both forecasters into a bundle file.
    Train(TrainArgs),
    /// Held-out predictor and forecaster errors against their baselines.
    Evaluate(EvaluateArgs),
    /// Feature importances and surrogate metrics for one held-out window.
    Explain(ExplainArgs),
    /// Modifications expected to move the prediction most.
    Recommend(RecommendArgs),
    /// Suggested next steps for reaching a desired RUL.
    Prescribe(PrescribeArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 80)]
    pub units: usize,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
}

/// Windowing and split settings; unset flags keep their defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct IngestFlags {
    /// Window length N.
    #[arg(long)]
    pub window: Option<usize>,
    /// Forecast horizon Z.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub train_stride: Option<usize>,
    #[arg(long)]
    pub eval_stride: Option<usize>,
    /// Sensors with pooled variance below this are dropped.
    #[arg(long)]
    pub variance_threshold: Option<f64>,
    /// Fraction of units held out.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Clip RUL targets at this value.
    #[arg(long)]
    pub rul_cap: Option<f64>,
}

impl IngestFlags {
    pub fn config(&self) -> IngestConfig {
        let d = IngestConfig::default();
        IngestConfig {
            window: self.window.unwrap_or(d.window),
            horizon: self.horizon.unwrap_or(d.horizon),
            train_stride: self.train_stride.unwrap_or(d.train_stride),
            eval_stride: self.eval_stride.unwrap_or(d.eval_stride),
            variance_threshold: self.variance_threshold.unwrap_or(d.variance_threshold),
            test_fraction: self.test_fraction.unwrap_or(d.test_fraction),
            split_seed: self.split_seed.unwrap_or(d.split_seed),
            rul_cap: self.rul_cap.or(d.rul_cap),
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Unit/cycle/sensor table (comma or whitespace separated).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub ingest: IngestFlags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Larger descent step for the predictor and neural forecaster, linear
    /// Adam-trained conditional forecaster.
    #[default]
    Tuned,
    /// Plain default training settings for all three networks.
    Reference,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// CSV table or data directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Bundle file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::Tuned)]
    pub preset: Preset,
    /// Override the epoch count of all three networks.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Override the learning rate of all three networks.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Windowing for CSV input; ignored for a data directory.
    #[command(flatten)]
    pub ingest: IngestFlags,
}

#[derive(Debug, Args)]
pub struct BundleData {
    #[arg(long)]
    pub bundle: PathBuf,
    /// CSV table (re-ingested with the bundle's settings) or data directory.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub source: BundleData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    MeanAgg,
    Ipca,
    Both,
}

impl MethodArg {
    pub fn methods(self) -> Vec<ExplainMethod> {
        match self {
            MethodArg::MeanAgg => vec![ExplainMethod::MeanAgg],
            MethodArg::Ipca => vec![ExplainMethod::Ipca],
            MethodArg::Both => vec![ExplainMethod::MeanAgg, ExplainMethod::Ipca],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub source: BundleData,
    /// Index into the held-out windows.
    #[arg(long)]
    pub instance: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingleMethod {
    MeanAgg,
    Ipca,
}

impl From<SingleMethod> for ExplainMethod {
    fn from(m: SingleMethod) -> Self {
        match m {
            SingleMethod::MeanAgg => ExplainMethod::MeanAgg,
            SingleMethod::Ipca => ExplainMethod::Ipca,
        }
    }
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub source: BundleData,
    #[arg(long)]
    pub instance: usize,
    /// Explanation whose importances select the features.
    #[arg(long, value_enum, default_value_t = SingleMethod::Ipca)]
    pub method: SingleMethod,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Future,
    WithinWindow,
}

impl From<ModeArg> for PrescribeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Future => PrescribeMode::Future,
            ModeArg::WithinWindow => PrescribeMode::WithinWindow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ForecasterArg {
    Neural,
    Static,
}

impl From<ForecasterArg> for ForecasterChoice {
    fn from(f: ForecasterArg) -> Self {
        match f {
            ForecasterArg::Neural => ForecasterChoice::Neural,
            ForecasterArg::Static => ForecasterChoice::Static,
        }
    }
}

#[derive(Debug, Args)]
pub struct PrescribeArgs {
    #[command(flatten)]
    pub source: BundleData,
    #[arg(long)]
    pub instance: usize,
    /// Desired RUL; defaults to the bundle's RUL scale.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Future)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ForecasterArg::Neural)]
    pub forecaster: ForecasterArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Bundle file, optionally as NAME=PATH; repeatable. The name defaults to
    /// the file stem.
    #[arg(long = "bundle", required = true)]
    pub bundles: Vec<String>,
    /// Data the bundles' held-out windows are taken from.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    /// Static files served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Idle sessions are dropped after this many seconds.
    #[arg(long, default_value_t = 1800)]
    pub session_ttl: u64,
}
