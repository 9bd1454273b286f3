//! The `stresskit` command line.
//!
//! Every invocation writes into one run directory (`--out`): the command's
//! outputs, `config.toml` with the resolved options, `run.json` with the
//! tool version, command and seed, and `run.log`. Failures additionally
//! leave `error.json` there and print the same JSON object to stderr.

mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use config::Conf;

pub const TOOL: &str = "stresskit";

#[derive(Debug, Parser)]
#[command(name = "stresskit", version, about = "Primary stress detection toolkit")]
pub struct Cli {
    /// TOML file with option defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory for outputs, config snapshot and log.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Leave the timestamp out of run.json.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a word manifest from TextGrid annotations.
    Ingest(IngestArgs),
    /// Measure the ten prosodic features of every nucleus.
    Features(FeaturesArgs),
    /// Train the nucleus SVM.
    Train(TrainArgs),
    /// Predict the stressed nucleus of each word with a trained SVM.
    Predict(PredictArgs),
    /// Encode gold stress as 20 ms frame labels.
    Encode(EncodeArgs),
    /// Turn per-frame logits into word predictions.
    Decode(DecodeArgs),
    /// Word accuracy with a bootstrap interval and a confusion matrix.
    Eval(EvalArgs),
    /// Agreement between two annotations of the same words.
    Agree(AgreeArgs),
    /// Stress variation within a corpus and overlap with other corpora.
    Analyze(AnalyzeArgs),
    /// Learning curve over training-set sizes.
    Curve(CurveArgs),
    /// Write a synthetic corpus of WAV and TextGrid files.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Features(_) => "features",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Encode(_) => "encode",
            Command::Decode(_) => "decode",
            Command::Eval(_) => "eval",
            Command::Agree(_) => "agree",
            Command::Analyze(_) => "analyze",
            Command::Curve(_) => "curve",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// A single TextGrid (use with --wav).
    #[arg(long)]
    pub textgrid: Option<PathBuf>,
    #[arg(long)]
    pub wav: Option<String>,
    /// Tab-separated listing with columns textgrid, wav, speaker, gender, dataset.
    #[arg(long)]
    pub list: Option<PathBuf>,
    #[arg(long)]
    pub word_tier: Option<String>,
    #[arg(long)]
    pub nucleus_tier: Option<String>,
    /// Tier marking the stressed nucleus, or "none".
    #[arg(long)]
    pub stress_tier: Option<String>,
    /// Characters that flag an annotator error, e.g. "?!".
    #[arg(long)]
    pub error_symbols: Option<String>,
    #[arg(long)]
    pub speaker: Option<String>,
    #[arg(long)]
    pub gender: Option<String>,
    #[arg(long)]
    pub dataset: Option<String>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory that relative audio paths are resolved against.
    #[arg(long)]
    pub audio_root: Option<PathBuf>,
    /// Also dump per-word contours.
    #[arg(long)]
    pub contours: bool,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    #[arg(long)]
    pub c: Option<f64>,
    /// "scale" or a positive number.
    #[arg(long)]
    pub gamma: Option<String>,
    /// rbf or linear.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_passes: Option<usize>,
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Run the kernel x C grid, scoring on --valid-features.
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub valid_features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub logits: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub resamples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// Manifest of the first annotator.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Manifest of the second annotator.
    #[arg(long)]
    pub b: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Manifest analysed for stress variation.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// NAME=MANIFEST compared with --train; repeatable.
    #[arg(long)]
    pub test: Vec<String>,
    #[arg(long)]
    pub min_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub train_features: Option<PathBuf>,
    /// NAME=FEATURES scored at every point; repeatable.
    #[arg(long)]
    pub test: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Manifest of the training words; when given, each sampled subset is
    /// written under subsets/ for external training runs.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub words: Option<usize>,
    #[arg(long)]
    pub speakers: Option<usize>,
    #[arg(long)]
    pub dataset: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("path does not exist: {0}")]
    MissingPath(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{context}: {source}")]
    Manifest {
        context: String,
        source: crate::corpus::ManifestError,
    },
    #[error(transparent)]
    TextGrid(#[from] crate::corpus::TextGridError),
    #[error(transparent)]
    Jsonl(#[from] crate::jsonl::JsonlError),
    #[error(transparent)]
    Svm(#[from] crate::svm::SvmError),
    #[error(transparent)]
    Codec(#[from] crate::framecodec::CodecError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("{0}")]
    Csv(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::MissingPath(_) => "missing_path",
            CliError::Io { .. } => "io",
            CliError::Manifest { .. } => "manifest",
            CliError::TextGrid(_) => "textgrid",
            CliError::Jsonl(_) => "jsonl",
            CliError::Svm(_) => "svm",
            CliError::Codec(_) => "codec",
            CliError::Metrics(_) => "metrics",
            CliError::Csv(_) => "csv",
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    kind: &'a str,
    message: String,
}

/// Metadata written to `run.json`.
#[derive(Debug, Serialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unix_time: Option<u64>,
    pub status: String,
    pub outputs: Vec<String>,
}

/// The run directory of one invocation.
pub struct RunDir {
    pub dir: PathBuf,
    log: Vec<String>,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            log: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Path of an output file, recorded in `run.json`.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    pub fn info(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::info!("{msg}");
        self.log.push(format!("INFO {msg}"));
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.log.push(format!("WARN {msg}"));
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let p = self.output(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        self.write_text(name, &text)
    }

    fn finish(&mut self, command: &str, seed: u64, deterministic: bool, conf: &toml::Table, status: &str) {
        let header = RunHeader {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            unix_time: (!deterministic).then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            }),
            status: status.into(),
            outputs: self.outputs.clone(),
        };
        let _ = std::fs::write(
            self.dir.join("run.json"),
            serde_json::to_string_pretty(&header).expect("serializable") + "\n",
        );
        let _ = std::fs::write(self.dir.join("config.toml"), toml::to_string(conf).unwrap_or_default());
        let mut log = self.log.join("\n");
        if !log.is_empty() {
            log.push('\n');
        }
        let _ = std::fs::write(self.dir.join("run.log"), log);
    }
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let command = cli.command.name();
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(command));
    let report = |e: &CliError, run: Option<&mut RunDir>| {
        let rep = ErrorReport {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command,
            kind: e.kind(),
            message: e.to_string(),
        };
        let json = serde_json::to_string(&rep).expect("serializable");
        eprintln!("{json}");
        if let Some(r) = run {
            let _ = std::fs::write(r.dir.join("error.json"), json + "\n");
        }
    };

    let mut conf = match Conf::load(cli.config.as_deref(), command) {
        Ok(c) => c,
        Err(e) => {
            report(&e, None);
            return 1;
        }
    };
    let seed = match conf.or("seed", cli.seed, 0u64) {
        Ok(s) => s,
        Err(e) => {
            report(&e, None);
            return 1;
        }
    };
    let mut run = match RunDir::create(&out) {
        Ok(r) => r,
        Err(e) => {
            report(&e, None);
            return 1;
        }
    };
    match commands::dispatch(&cli.command, &mut conf, &mut run, seed) {
        Ok(()) => {
            run.finish(command, seed, cli.deterministic, conf.snapshot(), "ok");
            0
        }
        Err(e) => {
            run.log.push(format!("ERROR {e}"));
            run.finish(command, seed, cli.deterministic, conf.snapshot(), "error");
            report(&e, Some(&mut run));
            1
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = e.exit_code();
            if e.use_stderr() {
                let rep = ErrorReport {
                    tool: TOOL,
                    version: env!("CARGO_PKG_VERSION"),
                    command: "",
                    kind: "usage",
                    message: e.kind().to_string(),
                };
                let _ = e.print();
                eprintln!("{}", serde_json::to_string(&rep).expect("serializable"));
            } else {
                let _ = e.print();
            }
            code
        }
    }
}
