//! `pauc` command-line front end.
//!
//! Subcommands: `synth`, `train`, `eval`, `cv`, `roc`. Runs are driven by a
//! JSON config of flat dotted keys (see [`RunConfig`]); `--set key=value`
//! and the explicit flags override it. Every model, report, CV table and ROC
//! file records the SHA-256 of the effective config and its seed.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{self, CsvLabels, Dataset, Standardizer};
use crate::error::Error;
use crate::metrics::{self, PaucRange};
use crate::modelsel::{self, EmSettings, HyperGrid};
use crate::scoring::{Activation, Family, Scorer};
use crate::trainer::{self, MetricsReport, ReportSummary, TrainConfig, TrainedModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const CONFIG_VERSION: &str = "1";
pub const ARTIFACT_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "pauc", about = "Train and evaluate partial-AUC-maximizing scorers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// JSON config with flat dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the 2-D XOR mixture dataset as CSV.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "n-pos")]
        n_pos: usize,
        #[arg(long = "n-neg")]
        n_neg: usize,
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Train one scorer and write `model.json`.
    Train(ConfigArgs),
    /// Score a dataset with a stored model and write `report.json` / `report.txt`.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
    /// Cross-validated grid search; writes `cv.csv` and `cv.json`.
    Cv(ConfigArgs),
    /// Write the ROC staircase of a stored model on a dataset as CSV.
    Roc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Effective run configuration. Serialized with flat dotted keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "config_version")]
    pub version: String,
    pub seed: Option<u64>,
    #[serde(rename = "data.path")]
    pub data_path: Option<PathBuf>,
    #[serde(rename = "data.label_column", default = "default_label_column")]
    pub label_column: String,
    #[serde(rename = "data.positive_value", default = "default_positive_value")]
    pub positive_value: String,
    /// Share of the data held out for early-stopping validation in `train`.
    #[serde(rename = "data.valid_fraction", default = "default_valid_fraction")]
    pub valid_fraction: f64,
    #[serde(rename = "scorer.family", default = "default_family")]
    pub family: Family,
    #[serde(rename = "scorer.hidden", default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(rename = "scorer.activation", default = "default_activation")]
    pub activation: Activation,
    #[serde(rename = "scorer.k_pos", default = "default_k")]
    pub k_pos: usize,
    #[serde(rename = "scorer.k_neg", default = "default_k")]
    pub k_neg: usize,
    #[serde(rename = "em.tol", default = "default_em_tol")]
    pub em_tol: f64,
    #[serde(rename = "em.max_iter", default = "default_em_max_iter")]
    pub em_max_iter: usize,
    #[serde(rename = "train.alpha", default)]
    pub alpha: f64,
    #[serde(rename = "train.beta", default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "train.learning_rate", default = "default_lr")]
    pub learning_rate: f64,
    #[serde(rename = "train.adam_beta1", default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(rename = "train.adam_beta2", default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(rename = "train.adam_eps", default = "default_eps")]
    pub adam_eps: f64,
    #[serde(rename = "train.l1_weight", default)]
    pub l1_weight: f64,
    #[serde(rename = "train.max_epochs", default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(rename = "train.patience", default = "default_patience")]
    pub patience: usize,
    #[serde(rename = "cv.k", default = "default_cv_k")]
    pub cv_k: usize,
    /// `default`, `full` or `custom` (uses the `cv.*` axes below).
    #[serde(rename = "cv.preset", default = "default_preset")]
    pub cv_preset: String,
    #[serde(rename = "cv.layers", default)]
    pub cv_layers: Vec<usize>,
    #[serde(rename = "cv.widths", default)]
    pub cv_widths: Vec<usize>,
    #[serde(rename = "cv.activations", default)]
    pub cv_activations: Vec<Activation>,
    #[serde(rename = "cv.components", default)]
    pub cv_components: Vec<usize>,
    #[serde(rename = "cv.l1", default)]
    pub cv_l1: Vec<f64>,
    #[serde(rename = "output.dir", default = "default_out_dir")]
    pub output_dir: PathBuf,
}

fn config_version() -> String {
    CONFIG_VERSION.into()
}
fn default_label_column() -> String {
    "label".into()
}
fn default_positive_value() -> String {
    "1".into()
}
fn default_valid_fraction() -> f64 {
    0.2
}
fn default_family() -> Family {
    Family::Linear
}
fn default_hidden() -> Vec<usize> {
    vec![50]
}
fn default_activation() -> Activation {
    Activation::Tanh
}
fn default_k() -> usize {
    2
}
fn default_em_tol() -> f64 {
    EmSettings::default().tol
}
fn default_em_max_iter() -> usize {
    EmSettings::default().max_iter
}
fn default_beta() -> f64 {
    0.1
}
fn default_lr() -> f64 {
    TrainConfig::default().learning_rate
}
fn default_beta1() -> f64 {
    TrainConfig::default().adam_beta1
}
fn default_beta2() -> f64 {
    TrainConfig::default().adam_beta2
}
fn default_eps() -> f64 {
    TrainConfig::default().adam_eps
}
fn default_max_epochs() -> usize {
    TrainConfig::default().max_epochs
}
fn default_patience() -> usize {
    TrainConfig::default().patience
}
fn default_cv_k() -> usize {
    5
}
fn default_preset() -> String {
    "default".into()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Parses a JSON object of dotted keys, then applies `KEY=VALUE`
    /// overrides.
    pub fn from_json(text: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut map = match text {
            Some(t) => match serde_json::from_str::<serde_json::Value>(t) {
                Ok(serde_json::Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Usage("config must be a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("config is not valid JSON: {e}"))),
            },
            None => serde_json::Map::new(),
        };
        for ov in overrides {
            let (key, value) = ov
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override `{ov}` is not KEY=VALUE")))?;
            let parsed = serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.into()));
            map.insert(key.to_string(), parsed);
        }
        let cfg: RunConfig = serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Usage(format!("unsupported config version `{}`", cfg.version)));
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("config key `seed` is required".into()))
    }

    pub fn range(&self) -> Result<PaucRange, CliError> {
        PaucRange::new(self.alpha, self.beta).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let cfg = TrainConfig {
            range: self.range()?,
            learning_rate: self.learning_rate,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
            l1_weight: self.l1_weight,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed: self.seed()?,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn em(&self) -> EmSettings {
        EmSettings { tol: self.em_tol, max_iter: self.em_max_iter }
    }

    pub fn labels(&self) -> CsvLabels {
        CsvLabels {
            column: self.label_column.clone(),
            positive: self.positive_value.clone(),
            ..CsvLabels::default()
        }
    }

    pub fn data_path(&self) -> Result<&Path, CliError> {
        let p = self
            .data_path
            .as_deref()
            .ok_or_else(|| CliError::Usage("config key `data.path` is required".into()))?;
        if !p.is_file() {
            return Err(CliError::Lib(Error::MissingFile(p.to_path_buf())));
        }
        Ok(p)
    }

    pub fn grid(&self) -> Result<HyperGrid, CliError> {
        match self.cv_preset.as_str() {
            "default" => Ok(HyperGrid::default_for(self.family)),
            "full" => Ok(HyperGrid::full_for(self.family)),
            "custom" => {
                let l1 = if self.cv_l1.is_empty() { vec![self.l1_weight] } else { self.cv_l1.clone() };
                let or = |v: &Vec<usize>, d: Vec<usize>| if v.is_empty() { d } else { v.clone() };
                Ok(match self.family {
                    Family::Linear => HyperGrid::Linear { l1 },
                    Family::Mlp => HyperGrid::Mlp {
                        layers: or(&self.cv_layers, vec![self.hidden.len()]),
                        widths: or(&self.cv_widths, self.hidden.first().map(|&w| vec![w]).unwrap_or_default()),
                        activations: if self.cv_activations.is_empty() {
                            vec![self.activation]
                        } else {
                            self.cv_activations.clone()
                        },
                        l1,
                    },
                    Family::GmmRatio => HyperGrid::GmmRatio { components: or(&self.cv_components, vec![self.k_pos]), l1 },
                })
            }
            other => Err(CliError::Usage(format!("unknown cv.preset `{other}`"))),
        }
    }

    /// Hex SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) => match e {
                Error::NonFiniteObjective(_) => EXIT_NUMERIC,
                Error::InvalidRange { .. } | Error::Config(_) | Error::BadShape(_) | Error::EmptyGrid => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

/// Stored model: the trained snapshot plus everything needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub run_config: RunConfig,
    pub standardizer: Standardizer,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub method: String,
    pub data: String,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvArtifact {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub grid: HyperGrid,
    pub result: modelsel::CvResult,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_model(path: &Path) -> Result<ModelArtifact, CliError> {
    if !path.is_file() {
        return Err(CliError::Lib(Error::MissingFile(path.to_path_buf())));
    }
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|_| CliError::Usage(format!("cannot read config {}", p.display())))?,
        ),
        None => None,
    };
    let mut cfg = RunConfig::from_json(text.as_deref(), &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(dir) = &args.out_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn load_data(cfg: &RunConfig, path: &Path) -> Result<Dataset, CliError> {
    Ok(dataset::load_csv(path, &cfg.label_column, &cfg.positive_value)?)
}

fn init_scorer(cfg: &RunConfig, train: &Dataset, seed: u64) -> Result<Scorer, CliError> {
    Ok(match cfg.family {
        Family::Linear => Scorer::init_linear(train.dim())?,
        Family::Mlp => Scorer::init_mlp(train.dim(), &cfg.hidden, cfg.activation, seed)?,
        Family::GmmRatio => modelsel::init_gmm_ratio(train, cfg.k_pos, cfg.k_neg, seed, cfg.em())?,
    })
}

fn cmd_train(args: &ConfigArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let seed = cfg.seed()?;
    let train_cfg = cfg.train_config()?;
    if !(cfg.valid_fraction > 0.0 && cfg.valid_fraction < 1.0) {
        return Err(CliError::Usage(format!("data.valid_fraction must be in (0, 1), got {}", cfg.valid_fraction)));
    }
    let data = load_data(&cfg, cfg.data_path()?)?;
    let (fit_raw, valid_raw) = dataset::split_stratified(&data, 1.0 - cfg.valid_fraction, seed)?;
    let standardizer = Standardizer::fit(&fit_raw);
    let fit = standardizer.apply(&fit_raw)?;
    let valid = standardizer.apply(&valid_raw)?;
    let init = init_scorer(&cfg, &fit, seed)?;
    let model = trainer::train(&init, &fit, &valid, &train_cfg)?;

    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("model.json");
    println!(
        "trained {} for {} epochs, best validation pAUC {:.4} at epoch {}",
        trainer::method_label(cfg.family, train_cfg.range),
        model.history.len(),
        model.best_valid_pauc().unwrap_or(f64::NAN),
        model.best_epoch.map_or("-".into(), |e| e.to_string()),
    );
    let artifact = ModelArtifact {
        version: ARTIFACT_VERSION.into(),
        config_hash: cfg.hash(),
        seed,
        run_config: cfg,
        standardizer,
        model,
    };
    write_json(&path, &artifact)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn scored_for(model: &ModelArtifact, data_path: &Path) -> Result<metrics::ScoreAssignment, CliError> {
    let raw = load_data(&model.run_config, data_path)?;
    let data = model.standardizer.apply(&raw)?;
    Ok(trainer::score_assignment(&model.model.scorer, &data)?)
}

fn cmd_eval(model_path: &Path, data_path: &Path, out_dir: Option<&Path>) -> Result<(), CliError> {
    let model = read_model(model_path)?;
    if !data_path.is_file() {
        return Err(CliError::Lib(Error::MissingFile(data_path.to_path_buf())));
    }
    let report = MetricsReport::from_scores(&scored_for(&model, data_path)?);
    let method = trainer::method_label(model.model.scorer.family(), model.model.config.range);
    let out_dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => model_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&out_dir)?;

    let mut text = format!(
        "config_hash: {}\nseed: {}\ndata: {}\nAUC: {:.1}\n\n",
        model.config_hash,
        model.seed,
        data_path.display(),
        100.0 * report.auc
    );
    text.push_str(&trainer::render_tables(&[ReportSummary::new(method.clone(), std::slice::from_ref(&report))]));
    fs::write(out_dir.join("report.txt"), &text)?;
    let artifact = ReportArtifact {
        version: ARTIFACT_VERSION.into(),
        config_hash: model.config_hash.clone(),
        seed: model.seed,
        method,
        data: data_path.display().to_string(),
        report,
    };
    write_json(&out_dir.join("report.json"), &artifact)?;
    print!("{text}");
    Ok(())
}

fn cmd_cv(args: &ConfigArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let seed = cfg.seed()?;
    let train_cfg = cfg.train_config()?;
    let grid = cfg.grid()?;
    let data = load_data(&cfg, cfg.data_path()?)?;
    let result = modelsel::grid_search_observed(&grid, &data, cfg.cv_k, &train_cfg, cfg.em(), &|_| {})?;

    fs::create_dir_all(&cfg.output_dir)?;
    let hash = cfg.hash();
    let mut csv_bytes = format!("# config_hash={hash}\n# seed={seed}\n").into_bytes();
    result.write_csv(&mut csv_bytes)?;
    fs::write(cfg.output_dir.join("cv.csv"), csv_bytes)?;
    let best = result.best_row();
    println!("best {:?}: mean validation pAUC {:.4} (std {:.4})", best.point, best.mean, best.std);
    let artifact = CvArtifact { version: ARTIFACT_VERSION.into(), config_hash: hash, seed, grid, result };
    write_json(&cfg.output_dir.join("cv.json"), &artifact)?;
    Ok(())
}

fn cmd_roc(model_path: &Path, data_path: &Path, out: &Path) -> Result<(), CliError> {
    let model = read_model(model_path)?;
    let roc = metrics::roc_curve(&scored_for(&model, data_path)?);
    let mut bytes = format!("# config_hash={}\n# seed={}\n", model.config_hash, model.seed).into_bytes();
    roc.write_csv(&mut bytes)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, bytes)?;
    Ok(())
}

fn cmd_synth(out: &Path, n_pos: usize, n_neg: usize, spread: f64, seed: u64) -> Result<(), CliError> {
    if n_pos == 0 || n_neg == 0 || !(spread >= 0.0) {
        return Err(CliError::Usage("synth needs n-pos >= 1, n-neg >= 1, spread >= 0".into()));
    }
    let ds = dataset::synth_xor_gmm(n_pos, n_neg, spread, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    dataset::save_csv(&ds, out, &CsvLabels::default())?;
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Synth { out, n_pos, n_neg, spread, seed } => cmd_synth(out, *n_pos, *n_neg, *spread, *seed),
        Command::Train(args) => cmd_train(args),
        Command::Eval { model, data, out_dir } => cmd_eval(model, data, out_dir.as_deref()),
        Command::Cv(args) => cmd_cv(args),
        Command::Roc { model, data, out } => cmd_roc(model, data, out),
    };
    match result {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
