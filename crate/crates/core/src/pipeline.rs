//! Pipeline stages behind the `confens` binary.
//!
//! Every stage writes into its `--out` directory: the resolved
//! `run_config.json`, its results, and `run.json` listing every artifact.
//! Wall-clock times go to `timestamps.json` so that all other files are a
//! pure function of the inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use crate::confidence::{confidence_vectors, ConfidenceConfig};
use crate::error::{Error, Result};
use crate::metrics::EvaluationReport;
use crate::probstream::{load_corpus, Corpus, Split};
use crate::selector::{
    operating_point, tune_threshold, AuxSource, AuxTransform, ClassWeighting, FeatureLayout,
    OperatingPoint, SelectorModel, Threshold, ThresholdObjective,
};
use crate::simulator::{simulate_to_dir, stress_preset, SimSpec, SIM_SPEC_FILE};
use crate::tuning::{
    evaluate_config, features_for, grid_search, LrGrid, SearchOptions, SearchSpace,
    DEFAULT_TRAIN_SIZE,
};

pub const RUN_MANIFEST_FILE: &str = "run.json";
pub const RUN_CONFIG_FILE: &str = "run_config.json";
pub const TIMESTAMP_FILE: &str = "timestamps.json";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Corpus directory or manifest file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// JSON config: a sim spec for `simulate`, a confidence config elsewhere.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset: a stress scenario for `simulate`, a confidence preset elsewhere.
    #[arg(long)]
    pub preset: Option<String>,
    /// Stream layer to read (0 is the final layer).
    #[arg(long)]
    pub layer: Option<u32>,
    /// Keep only the first this-many seconds of every stream.
    #[arg(long)]
    pub duration_s: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Auxiliary score source appended to the features; repeatable.
    #[arg(long = "aux")]
    pub aux: Vec<String>,
    /// `raw` or `log`.
    #[arg(long, default_value = "raw")]
    pub aux_transform: String,
    /// Leave out the confidence columns.
    #[arg(long)]
    pub no_confidence: bool,
    /// Training utterances sampled per dataset.
    #[arg(long, default_value_t = DEFAULT_TRAIN_SIZE)]
    pub train_size: usize,
    /// Fix the L2 strength instead of tuning it on validation.
    #[arg(long)]
    pub l2_lambda: Option<f64>,
    /// Fix the class weighting (`uniform` or `balanced`) instead of tuning it.
    #[arg(long)]
    pub class_weighting: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConfidenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainSelectorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridsearchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Search space JSON; the full default grid when absent.
    #[arg(long)]
    pub space: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Selector JSON written by `train-selector` or `gridsearch`.
    #[arg(long)]
    pub selector: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Re-tune the binary decision threshold on the validation split.
    #[arg(long)]
    pub threshold_objective: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Evaluation report JSON written by `evaluate`.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus from a preset or spec file.
    Simulate(SimulateArgs),
    /// Per-utterance confidence table.
    Confidence(ConfidenceArgs),
    /// Train one selector, tuning the LR hyperparameters on validation.
    TrainSelector(TrainSelectorArgs),
    /// Search confidence configs and LR hyperparameters.
    Gridsearch(GridsearchArgs),
    /// Selection accuracy and WER of a trained selector.
    Evaluate(EvaluateArgs),
    /// Render an evaluation report as systems x datasets tables.
    Report(ReportArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a) => &a.common,
            Command::Confidence(a) => &a.common,
            Command::TrainSelector(a) => &a.common,
            Command::Gridsearch(a) => &a.common,
            Command::Evaluate(a) => &a.common,
            Command::Report(a) => &a.common,
        }
    }
}

/// Fully resolved inputs of one run, defaults materialized.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_spec: Option<SimSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<ConfidenceConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer_id: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<FeatureLayout>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_grid: Option<LrGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_space: Option<SearchSpace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_objective: Option<ThresholdObjective>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub out: String,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub run_config: String,
    /// artifact name -> path relative to the run directory
    pub artifacts: BTreeMap<String, String>,
    pub timestamps: String,
}

struct RunDir {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
    started_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            artifacts: BTreeMap::new(),
            started_ms: now_ms(),
        })
    }

    fn json<T: Serialize>(&mut self, name: &str, file: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(file);
        crate::probstream::io::write_json(&path, value)?;
        self.artifacts.insert(name.into(), file.into());
        Ok(path)
    }

    fn text(&mut self, name: &str, file: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(file);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.artifacts.insert(name.into(), file.into());
        Ok(path)
    }

    /// Records an artifact some other writer put in the run directory.
    fn register(&mut self, name: &str, file: &str) {
        self.artifacts.insert(name.into(), file.into());
    }

    fn finish(self, config: &RunConfig) -> Result<PathBuf> {
        let config_path = self.dir.join(RUN_CONFIG_FILE);
        crate::probstream::io::write_json(&config_path, config)?;
        let stamps = serde_json::json!({
            "started_unix_ms": self.started_ms as u64,
            "finished_unix_ms": now_ms() as u64,
        });
        crate::probstream::io::write_json(&self.dir.join(TIMESTAMP_FILE), &stamps)?;
        let manifest = RunManifest {
            command: config.command.clone(),
            run_config: RUN_CONFIG_FILE.into(),
            artifacts: self.artifacts,
            timestamps: TIMESTAMP_FILE.into(),
        };
        let path = self.dir.join(RUN_MANIFEST_FILE);
        crate::probstream::io::write_json(&path, &manifest)?;
        Ok(path)
    }
}

/// Runs one stage on a worker pool sized by `--workers`; returns the path of `run.json`.
pub fn run(command: &Command) -> Result<PathBuf> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = command.common().workers {
        if w == 0 {
            return Err(Error::validation("--workers must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Confidence(a) => cmd_confidence(a),
        Command::TrainSelector(a) => cmd_train_selector(a),
        Command::Gridsearch(a) => cmd_gridsearch(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
    })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn base_config(command: &str, common: &CommonArgs) -> RunConfig {
    RunConfig {
        command: command.into(),
        corpus: common.corpus.as_deref().map(display),
        duration_s: common.duration_s,
        workers: common.workers,
        out: display(&common.out),
        ..Default::default()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads `--corpus`, truncated to `--duration-s` when given.
fn load_input_corpus(common: &CommonArgs) -> Result<Corpus> {
    let path = common
        .corpus
        .as_deref()
        .ok_or_else(|| Error::validation("--corpus is required"))?;
    let corpus = load_corpus(path)?;
    match common.duration_s {
        Some(d) => corpus.truncated(d),
        None => Ok(corpus),
    }
}

/// Confidence config from `--config` or `--preset`, else the default preset.
fn resolve_confidence(common: &CommonArgs) -> Result<ConfidenceConfig> {
    match (&common.config, &common.preset) {
        (Some(_), Some(_)) => Err(Error::validation("give either --config or --preset, not both")),
        (Some(path), None) => ConfidenceConfig::from_json_str(&read_text(path)?),
        (None, Some(name)) => ConfidenceConfig::preset(name),
        (None, None) => Ok(ConfidenceConfig::default_preset()),
    }
}

fn aux_transform(name: &str) -> Result<AuxTransform> {
    match name {
        "raw" => Ok(AuxTransform::Raw),
        "log" => Ok(AuxTransform::Log),
        other => Err(Error::validation(format!(
            "unknown aux transform `{other}` (raw, log)"
        ))),
    }
}

fn class_weighting(name: &str) -> Result<ClassWeighting> {
    match name {
        "uniform" => Ok(ClassWeighting::Uniform),
        "balanced" => Ok(ClassWeighting::Balanced),
        other => Err(Error::validation(format!(
            "unknown class weighting `{other}` (uniform, balanced)"
        ))),
    }
}

/// Length of the `source` score vectors in `corpus`.
fn aux_dim(corpus: &Corpus, source: &str) -> Result<usize> {
    corpus
        .parts
        .iter()
        .flatten()
        .find_map(|r| r.aux_scores.as_ref().and_then(|a| a.get(source)).map(Vec::len))
        .ok_or_else(|| Error::validation(format!("corpus has no aux scores `{source}`")))
}

fn search_options(corpus: &Corpus, common: &CommonArgs, f: &FeatureArgs) -> Result<SearchOptions> {
    if f.no_confidence && f.aux.is_empty() {
        return Err(Error::validation("--no-confidence needs at least one --aux source"));
    }
    let aux_sources = f
        .aux
        .iter()
        .map(|s| {
            Ok(AuxSource {
                source_id: s.clone(),
                dim: aux_dim(corpus, s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchOptions {
        train_size: f.train_size,
        seed: common.seed.unwrap_or(DEFAULT_SEED),
        layer_id: common.layer.unwrap_or(0),
        aux_sources,
        aux_transform: aux_transform(&f.aux_transform)?,
        confidence_features: !f.no_confidence,
    })
}

fn lr_grid(f: &FeatureArgs) -> Result<LrGrid> {
    let mut grid = LrGrid::default();
    if let Some(l) = f.l2_lambda {
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::validation(format!("--l2-lambda {l} must be >= 0")));
        }
        grid.l2_lambdas = vec![l];
    }
    if let Some(w) = &f.class_weighting {
        grid.class_weightings = vec![class_weighting(w)?];
    }
    Ok(grid)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<PathBuf> {
    let common = &args.common;
    let mut spec = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(Error::validation("give either --config or --preset, not both"))
        }
        (Some(path), None) => SimSpec::from_json(&read_text(path)?)?,
        (None, Some(name)) => stress_preset(name)?,
        (None, None) => return Err(Error::validation("simulate needs --config or --preset")),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let mut run = RunDir::create(&common.out)?;
    let corpus_dir = common.out.join("corpus");
    simulate_to_dir(&spec, &corpus_dir)?;
    run.register("corpus_manifest", &format!("corpus/{}", crate::probstream::MANIFEST_FILE));
    run.register("sim_spec", &format!("corpus/{SIM_SPEC_FILE}"));
    let mut config = base_config("simulate", common);
    config.preset = common.preset.clone();
    config.seed = Some(spec.seed);
    config.sim_spec = Some(spec);
    run.finish(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRow {
    pub utterance_id: String,
    pub dataset_id: String,
    pub split: Split,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceTable {
    pub config: ConfidenceConfig,
    pub layer_id: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    pub models: Vec<String>,
    pub rows: Vec<ConfidenceRow>,
}

impl ConfidenceTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["utterance_id".to_string(), "dataset_id".into(), "split".into()];
        header.extend(self.models.iter().map(|m| format!("conf:{m}")));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                row.utterance_id.clone(),
                row.dataset_id.clone(),
                row.split.as_str().to_string(),
            ];
            rec.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Confidences of every utterance, splits in train/validation/test order.
pub fn confidence_table(
    corpus: &Corpus,
    cfg: &ConfidenceConfig,
    layer_id: u32,
    duration_s: Option<f64>,
) -> Result<ConfidenceTable> {
    let mut rows = Vec::new();
    for split in [Split::Train, Split::Validation, Split::Test] {
        let utterances = corpus.utterances(split);
        let conf = confidence_vectors(&utterances, corpus.models(), cfg, layer_id)?;
        for u in &utterances {
            rows.push(ConfidenceRow {
                utterance_id: u.record.utterance_id.clone(),
                dataset_id: u.dataset_id.to_string(),
                split,
                values: conf[&u.record.utterance_id].clone(),
            });
        }
    }
    Ok(ConfidenceTable {
        config: *cfg,
        layer_id,
        duration_s,
        models: corpus.models().to_vec(),
        rows,
    })
}

pub fn cmd_confidence(args: &ConfidenceArgs) -> Result<PathBuf> {
    let common = &args.common;
    let cfg = resolve_confidence(common)?;
    cfg.validate()?;
    let corpus = load_input_corpus(common)?;
    let layer_id = common.layer.unwrap_or(0);
    let table = confidence_table(&corpus, &cfg, layer_id, common.duration_s)?;
    let mut run = RunDir::create(&common.out)?;
    run.json("confidences", "confidences.json", &table)?;
    run.text("confidences_csv", "confidences.csv", &table.to_csv()?)?;
    let mut config = base_config("confidence", common);
    config.confidence = Some(cfg);
    config.preset = common.preset.clone();
    config.layer_id = Some(layer_id);
    run.finish(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub validation_a_avg: f64,
    pub per_dataset_accuracy: BTreeMap<String, f64>,
    pub l2_lambda: f64,
    pub class_weighting: ClassWeighting,
}

pub fn cmd_train_selector(args: &TrainSelectorArgs) -> Result<PathBuf> {
    let common = &args.common;
    let cfg = resolve_confidence(common)?;
    let corpus = load_input_corpus(common)?;
    let options = search_options(&corpus, common, &args.features)?;
    let grid = lr_grid(&args.features)?;
    let result = grid_search(&corpus, &SearchSpace::single(&cfg), &grid, &options, common.workers)?;
    let best = &result.leaderboard[0];
    let summary = TrainingSummary {
        validation_a_avg: best.a_avg,
        per_dataset_accuracy: best.per_dataset_accuracy.clone(),
        l2_lambda: best.l2_lambda,
        class_weighting: best.class_weighting.clone(),
    };
    let mut run = RunDir::create(&common.out)?;
    run.text("selector", "selector.json", &(result.best_selector.to_json()? + "\n"))?;
    run.json("training_summary", "training_summary.json", &summary)?;
    let mut config = base_config("train-selector", common);
    config.confidence = Some(cfg);
    config.preset = common.preset.clone();
    config.layer_id = Some(options.layer_id);
    config.layout = result.best_selector.layout.clone();
    config.train_size = Some(options.train_size);
    config.lr_grid = Some(grid);
    config.seed = Some(options.seed);
    run.finish(&config)
}

pub fn cmd_gridsearch(args: &GridsearchArgs) -> Result<PathBuf> {
    let common = &args.common;
    if common.config.is_some() || common.preset.is_some() {
        return Err(Error::validation(
            "gridsearch takes its space from --space, not --config or --preset",
        ));
    }
    let space = match &args.space {
        Some(path) => serde_json::from_str::<SearchSpace>(&read_text(path)?)
            .map_err(|e| Error::json(display(path), e))?,
        None => SearchSpace::default(),
    };
    let corpus = load_input_corpus(common)?;
    let options = search_options(&corpus, common, &args.features)?;
    let grid = lr_grid(&args.features)?;
    let result = grid_search(&corpus, &space, &grid, &options, common.workers)?;
    let mut run = RunDir::create(&common.out)?;
    run.json("tuning_result", "tuning_result.json", &result)?;
    run.text("leaderboard", "leaderboard.csv", &result.leaderboard_csv()?)?;
    run.json("per_dataset_best", "per_dataset_best.json", &result.per_dataset_best)?;
    run.text("selector", "selector.json", &(result.best_selector.to_json()? + "\n"))?;
    let mut config = base_config("gridsearch", common);
    config.layer_id = Some(options.layer_id);
    config.layout = result.best_selector.layout.clone();
    config.train_size = Some(options.train_size);
    config.lr_grid = Some(grid);
    config.search_space = Some(space);
    config.seed = Some(options.seed);
    run.finish(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub objective: ThresholdObjective,
    pub threshold: Threshold,
    /// Routing accuracy per domain on the validation split.
    pub validation: OperatingPoint,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<PathBuf> {
    let common = &args.common;
    let mut selector = SelectorModel::from_json(&read_text(&args.selector)?)?;
    let layout = selector
        .layout
        .clone()
        .ok_or_else(|| Error::LayoutMismatch("selector has no recorded feature layout".into()))?;
    if let Some(layer) = common.layer {
        if layer != layout.layer_id {
            return Err(Error::LayoutMismatch(format!(
                "selector was trained on layer {}, --layer asks for {layer}",
                layout.layer_id
            )));
        }
    }
    let cfg = match (&selector.confidence, common.config.is_some() || common.preset.is_some()) {
        (Some(recorded), true) => {
            let asked = resolve_confidence(common)?;
            if asked != *recorded {
                return Err(Error::LayoutMismatch(format!(
                    "selector was trained with confidence {recorded}, got {asked}"
                )));
            }
            asked
        }
        (Some(recorded), false) => *recorded,
        (None, _) => resolve_confidence(common)?,
    };
    let split: Split = args.split.parse()?;
    let corpus = load_input_corpus(common)?;
    let objective = args
        .threshold_objective
        .as_deref()
        .map(str::parse::<ThresholdObjective>)
        .transpose()?;
    let mut run = RunDir::create(&common.out)?;
    if let Some(objective) = objective {
        let validation = corpus.utterances(Split::Validation);
        if validation.is_empty() {
            return Err(Error::validation("threshold tuning needs a validation split"));
        }
        let features = features_for(&validation, &cfg, &layout)?;
        selector = tune_threshold(&selector, &features, objective)?;
        let theta = match selector.threshold {
            Threshold::Binary(t) => Some(t),
            _ => None,
        };
        let report = ThresholdReport {
            objective,
            threshold: selector.threshold.clone(),
            validation: operating_point(&selector, &features, theta)?,
        };
        run.json("threshold", "threshold.json", &report)?;
        run.text("selector", "selector.json", &(selector.to_json()? + "\n"))?;
    }
    let report = evaluate_config(&corpus, &cfg, &selector, split)?;
    run.json("report", "report.json", &report)?;
    run.text("report_csv", "report.csv", &report.to_csv()?)?;
    let mut config = base_config("evaluate", common);
    config.confidence = Some(cfg);
    config.preset = common.preset.clone();
    config.layer_id = Some(layout.layer_id);
    config.layout = Some(layout);
    config.selector = Some(display(&args.selector));
    config.split = Some(split);
    config.threshold_objective = objective;
    run.finish(&config)
}

/// Systems x datasets WER table (percent) with a selection-accuracy row.
pub fn render_report(report: &EvaluationReport) -> String {
    let datasets: Vec<&String> = report.per_dataset_accuracy.keys().collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["WER, %".to_string()];
    header.extend(datasets.iter().map(|d| d.to_string()));
    rows.push(header);
    for system in report.systems() {
        let mut row = vec![system.clone()];
        for d in &datasets {
            let cell = report
                .wer
                .get(&system)
                .and_then(|m| m.get(*d))
                .map(|v| format!("{:.2}", 100.0 * v))
                .unwrap_or_else(|| "-".into());
            row.push(cell);
        }
        rows.push(row);
    }
    let mut acc = vec!["selection acc, %".to_string()];
    acc.extend(
        datasets
            .iter()
            .map(|d| format!("{:.2}", 100.0 * report.per_dataset_accuracy[*d])),
    );
    rows.push(acc);

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let line = |row: &[String]| {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                if i == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let mut out = line(&rows[0]);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    let n_systems = report.systems().len();
    for (i, row) in rows[1..].iter().enumerate() {
        if i == n_systems {
            out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
        }
        out.push_str(&line(row));
    }
    out.push_str(&format!(
        "\nA_avg = {:.2}% ({} split)\n",
        100.0 * report.a_avg,
        report.split.as_str()
    ));
    out
}

pub fn cmd_report(args: &ReportArgs) -> Result<PathBuf> {
    let common = &args.common;
    let report: EvaluationReport = serde_json::from_str(&read_text(&args.report)?)
        .map_err(|e| Error::json(display(&args.report), e))?;
    let mut run = RunDir::create(&common.out)?;
    run.text("table", "table.md", &render_report(&report))?;
    run.text("table_csv", "table.csv", &report.to_csv()?)?;
    let mut config = base_config("report", common);
    config.report = Some(display(&args.report));
    run.finish(&config)
}
