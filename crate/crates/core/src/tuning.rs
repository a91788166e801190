//! Exhaustive search over confidence measures and selector hyperparameters.
//!
//! For every confidence configuration a selector is trained on `N` sampled
//! training utterances per dataset for each point of the LR grid, and scored
//! by A_avg on the validation split. Step-level work is shared: one pass per
//! temperature computes the tempered distributions once and derives every
//! measure, order, normalization, aggregation and blank policy from them.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::{
    aggregate_steps, entropy_with_logs, max_entropy, normalize_entropy, step_distribution_into,
    Aggregation, ConfidenceConfig, Measure, Normalization,
};
use crate::error::{Error, Result};
use crate::metrics::{average_per_dataset_accuracy, EvaluationReport};
use crate::probstream::{Corpus, LabeledUtterance, Split};
use crate::rng::{hash_str, keyed_rng};
use crate::selector::{
    assemble_features, train_selector, ClassWeighting, FeatureLayout, FeatureVector,
    SelectorModel, TrainParams,
};

pub const DEFAULT_TEMPERATURES: [f64; 10] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_ALPHAS: [f64; 6] = [0.1, 0.2, 0.25, 0.33, 0.5, 1.0];
pub const DEFAULT_TRAIN_SIZE: usize = 100;

const TAG_SAMPLE: u64 = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub temperatures: Vec<f64>,
    pub alphas: Vec<f64>,
    pub measures: Vec<Measure>,
    pub normalizations: Vec<Normalization>,
    pub aggregations: Vec<Aggregation>,
    pub blank_options: Vec<bool>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            temperatures: DEFAULT_TEMPERATURES.to_vec(),
            alphas: DEFAULT_ALPHAS.to_vec(),
            measures: Measure::ALL.to_vec(),
            normalizations: Normalization::ALL.to_vec(),
            aggregations: Aggregation::ALL.to_vec(),
            blank_options: vec![false, true],
        }
    }
}

impl SearchSpace {
    /// The space holding exactly one configuration.
    pub fn single(cfg: &ConfidenceConfig) -> Self {
        SearchSpace {
            temperatures: vec![cfg.temperature],
            alphas: vec![cfg.alpha],
            measures: vec![cfg.measure],
            normalizations: vec![cfg.normalization],
            aggregations: vec![cfg.aggregation],
            blank_options: vec![cfg.exclude_blanks],
        }
    }

    pub fn with_measures(mut self, measures: &[Measure]) -> Self {
        self.measures = measures.to_vec();
        self
    }
}

fn sorted_unique_f64(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn sorted_unique<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Every configuration of `space` in canonical order
/// (measure, normalization, aggregation, blank policy, temperature, alpha).
///
/// `max_prob` has no normalization or order, so it contributes one config per
/// (aggregation, blank policy, temperature). Gibbs keeps the full alpha axis.
pub fn enumerate_space(space: &SearchSpace) -> Vec<ConfidenceConfig> {
    let temps = sorted_unique_f64(&space.temperatures);
    let alphas = sorted_unique_f64(&space.alphas);
    let aggs = sorted_unique(&space.aggregations);
    let blanks = sorted_unique(&space.blank_options);
    let norms = sorted_unique(&space.normalizations);
    let mut out = Vec::new();
    for measure in sorted_unique(&space.measures) {
        let (norm_axis, alpha_axis) = if measure == Measure::MaxProb {
            (vec![Normalization::Linear], vec![1.0])
        } else {
            (norms.clone(), alphas.clone())
        };
        for &normalization in &norm_axis {
            for &aggregation in &aggs {
                for &exclude_blanks in &blanks {
                    for &temperature in &temps {
                        for &alpha in &alpha_axis {
                            out.push(ConfidenceConfig {
                                measure,
                                normalization,
                                aggregation,
                                exclude_blanks,
                                temperature,
                                alpha,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrGrid {
    pub l2_lambdas: Vec<f64>,
    pub class_weightings: Vec<ClassWeighting>,
}

impl Default for LrGrid {
    fn default() -> Self {
        LrGrid {
            l2_lambdas: vec![0.001, 0.01, 0.1, 1.0, 10.0],
            class_weightings: vec![ClassWeighting::Uniform, ClassWeighting::Balanced],
        }
    }
}

impl LrGrid {
    pub fn single(params: &TrainParams) -> Self {
        LrGrid {
            l2_lambdas: vec![params.l2_lambda],
            class_weightings: vec![params.class_weighting.clone()],
        }
    }

    pub fn points(&self) -> Vec<TrainParams> {
        self.l2_lambdas
            .iter()
            .flat_map(|&l| {
                self.class_weightings
                    .iter()
                    .map(move |w| TrainParams::new(l, w.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Training utterances sampled per dataset.
    pub train_size: usize,
    pub seed: u64,
    pub layer_id: u32,
    /// Extra feature columns appended after the confidences.
    #[serde(default)]
    pub aux_sources: Vec<crate::selector::AuxSource>,
    #[serde(default)]
    pub aux_transform: crate::selector::AuxTransform,
    /// When false the selector sees only the auxiliary columns.
    #[serde(default = "yes")]
    pub confidence_features: bool,
}

fn yes() -> bool {
    true
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            train_size: DEFAULT_TRAIN_SIZE,
            seed: 42,
            layer_id: 0,
            aux_sources: Vec::new(),
            aux_transform: Default::default(),
            confidence_features: true,
        }
    }
}

impl SearchOptions {
    pub fn layout(&self, models: &[String]) -> FeatureLayout {
        FeatureLayout {
            models: if self.confidence_features {
                models.to_vec()
            } else {
                Vec::new()
            },
            layer_id: self.layer_id,
            aux_sources: self.aux_sources.clone(),
            aux_transform: self.aux_transform,
        }
    }
}

/// Draws `n` training utterances per dataset.
///
/// Each dataset's draw depends only on the seed and its id; datasets are
/// concatenated in id order and each draw keeps file order.
pub fn sample_training<'a>(
    corpus: &'a Corpus,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledUtterance<'a>>> {
    let train = corpus.utterances(Split::Train);
    let mut out = Vec::with_capacity(n * corpus.manifest.dataset_ids().len());
    for dataset_id in corpus.manifest.dataset_ids() {
        let pool: Vec<_> = train.iter().filter(|u| u.dataset_id == dataset_id).collect();
        if pool.len() < n {
            return Err(Error::validation(format!(
                "dataset `{dataset_id}` has {} training utterances, {n} required",
                pool.len()
            )));
        }
        let mut rng = keyed_rng(seed, &[TAG_SAMPLE, hash_str(&dataset_id)]);
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        for i in 0..n {
            let j = rng.random_range(i..pool.len());
            idx.swap(i, j);
        }
        let mut chosen = idx[..n].to_vec();
        chosen.sort_unstable();
        out.extend(chosen.into_iter().map(|i| *pool[i]));
    }
    Ok(out)
}

/// One row of the leaderboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub config: ConfidenceConfig,
    pub a_avg: f64,
    pub per_dataset_accuracy: BTreeMap<String, f64>,
    pub l2_lambda: f64,
    pub class_weighting: ClassWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerDatasetBest {
    pub config: ConfidenceConfig,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_config: ConfidenceConfig,
    pub best_selector: SelectorModel,
    pub validation_a_avg: f64,
    /// Sorted by A_avg descending, ties in canonical config order.
    pub leaderboard: Vec<LeaderboardEntry>,
    /// Best configuration for each dataset taken alone.
    pub per_dataset_best: BTreeMap<String, PerDatasetBest>,
    pub train_size: usize,
    pub seed: u64,
}

impl TuningResult {
    pub fn leaderboard_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "rank",
            "measure",
            "normalization",
            "aggregation",
            "exclude_blanks",
            "temperature",
            "alpha",
            "a_avg",
            "l2_lambda",
            "class_weighting",
        ])?;
        let name = |v: serde_json::Value| match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        for (rank, e) in self.leaderboard.iter().enumerate() {
            let c = &e.config;
            w.write_record([
                (rank + 1).to_string(),
                name(serde_json::json!(c.measure)),
                name(serde_json::json!(c.normalization)),
                name(serde_json::json!(c.aggregation)),
                c.exclude_blanks.to_string(),
                c.temperature.to_string(),
                c.alpha.to_string(),
                e.a_avg.to_string(),
                e.l2_lambda.to_string(),
                name(serde_json::json!(e.class_weighting)),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Steps of one stream: per-step distributions are recomputed per temperature.
struct StreamRef<'a> {
    stream: &'a crate::probstream::ProbabilityStream,
    blank: Vec<bool>,
}

/// Streams of the utterances in use, `utterance x model`.
struct StreamTable<'a> {
    streams: Vec<StreamRef<'a>>,
    n_models: usize,
}

impl<'a> StreamTable<'a> {
    fn new(utterances: &[LabeledUtterance<'a>], models: &[String], layer_id: u32) -> Result<Self> {
        let mut streams = Vec::with_capacity(utterances.len() * models.len());
        for u in utterances {
            for m in models {
                let stream = u.record.select_layer(m, layer_id).map_err(|e| {
                    Error::record(&u.record.utterance_id, format!("model `{m}`: {e}"))
                })?;
                let blank = stream.steps.iter().map(|s| stream.is_blank(s)).collect();
                streams.push(StreamRef { stream, blank });
            }
        }
        Ok(StreamTable {
            streams,
            n_models: models.len(),
        })
    }
}

/// Configurations sharing one temperature, and the (measure, alpha) families
/// whose step values they need.
struct TemperatureGroup {
    temperature: f64,
    families: Vec<(Measure, f64)>,
    /// (global config index, config, family index)
    configs: Vec<(usize, ConfidenceConfig, usize)>,
}

fn group_by_temperature(configs: &[ConfidenceConfig]) -> Vec<TemperatureGroup> {
    let mut groups: Vec<TemperatureGroup> = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let g = match groups
            .iter()
            .position(|g| g.temperature.to_bits() == cfg.temperature.to_bits())
        {
            Some(g) => g,
            None => {
                groups.push(TemperatureGroup {
                    temperature: cfg.temperature,
                    families: Vec::new(),
                    configs: Vec::new(),
                });
                groups.len() - 1
            }
        };
        let group = &mut groups[g];
        let alpha = if cfg.measure.uses_alpha() { cfg.alpha } else { 1.0 };
        let fam = match group
            .families
            .iter()
            .position(|&(m, a)| m == cfg.measure && a.to_bits() == alpha.to_bits())
        {
            Some(f) => f,
            None => {
                group.families.push((cfg.measure, alpha));
                group.families.len() - 1
            }
        };
        group.configs.push((i, *cfg, fam));
    }
    groups
}

/// Confidence matrices (`utterance x model`, row-major) of every config in a
/// temperature group, in group order.
fn group_confidences(group: &TemperatureGroup, table: &StreamTable<'_>) -> Result<Vec<Vec<f64>>> {
    let n_streams = table.streams.len();
    let mut out = vec![vec![0.0; n_streams]; group.configs.len()];
    let mut p = Vec::new();
    let mut ln_p = Vec::new();
    // raw[f][step]: entropy, or max probability for max_prob
    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); group.families.len()];
    let mut conf_buf: Vec<f64> = Vec::new();
    for (s_idx, sref) in table.streams.iter().enumerate() {
        let stream = sref.stream;
        raw.iter_mut().for_each(|r| r.clear());
        for step in &stream.steps {
            step_distribution_into(&step.values, stream.kind, group.temperature, &mut p)?;
            ln_p.clear();
            ln_p.extend(p.iter().map(|x| x.ln()));
            for (f, &(measure, alpha)) in group.families.iter().enumerate() {
                let v = match measure {
                    Measure::MaxProb => p.iter().copied().fold(0.0, f64::max).clamp(0.0, 1.0),
                    m => entropy_with_logs(&p, &ln_p, m, alpha),
                };
                raw[f].push(v);
            }
        }
        for (c_idx, (_, cfg, fam)) in group.configs.iter().enumerate() {
            let (measure, alpha) = group.families[*fam];
            conf_buf.clear();
            if measure == Measure::MaxProb {
                conf_buf.extend_from_slice(&raw[*fam]);
            } else {
                let h_max = max_entropy(stream.vocab_size, measure, alpha);
                conf_buf.extend(
                    raw[*fam]
                        .iter()
                        .map(|&h| normalize_entropy(h, h_max, cfg.normalization)),
                );
            }
            out[c_idx][s_idx] =
                aggregate_steps(&conf_buf, &sref.blank, cfg.aggregation, cfg.exclude_blanks);
        }
    }
    Ok(out)
}

fn feature_vectors(
    conf: &[f64],
    n_models: usize,
    offset: usize,
    utterances: &[LabeledUtterance<'_>],
    layout: &FeatureLayout,
) -> Result<Vec<FeatureVector>> {
    let rows: BTreeMap<String, Vec<f64>> = utterances
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let start = (offset + i) * n_models;
            (u.record.utterance_id.clone(), conf[start..start + n_models].to_vec())
        })
        .collect();
    assemble_features(&rows, utterances, layout)
}

struct ConfigOutcome {
    a_avg: f64,
    per_dataset: BTreeMap<String, f64>,
    params: TrainParams,
    selector: SelectorModel,
}

fn fit_and_score(
    train: &[FeatureVector],
    validation: &[FeatureVector],
    validation_datasets: &[&str],
    n_classes: usize,
    lr_points: &[TrainParams],
) -> Result<ConfigOutcome> {
    let mut best: Option<ConfigOutcome> = None;
    for params in lr_points {
        let selector = train_selector(train, n_classes, params)?;
        let mut outcomes = Vec::with_capacity(validation.len());
        for (v, d) in validation.iter().zip(validation_datasets) {
            let pred = selector.predict(&v.values)?.index;
            outcomes.push((*d, Some(pred) == v.true_label));
        }
        let acc = average_per_dataset_accuracy(outcomes);
        if best.as_ref().is_none_or(|b| acc.a_avg > b.a_avg) {
            best = Some(ConfigOutcome {
                a_avg: acc.a_avg,
                per_dataset: acc.per_dataset,
                params: params.clone(),
                selector,
            });
        }
    }
    best.ok_or_else(|| Error::validation("empty LR hyperparameter grid"))
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

/// Grid search over `space` x `lr_grid`, maximizing validation A_avg.
///
/// A pure function of its inputs: `workers` only changes speed.
pub fn grid_search(
    corpus: &Corpus,
    space: &SearchSpace,
    lr_grid: &LrGrid,
    options: &SearchOptions,
    workers: Option<usize>,
) -> Result<TuningResult> {
    let configs = enumerate_space(space);
    if configs.is_empty() {
        return Err(Error::validation("search space is empty"));
    }
    for cfg in &configs {
        cfg.validate()?;
    }
    let lr_points = lr_grid.points();
    if lr_points.is_empty() {
        return Err(Error::validation("empty LR hyperparameter grid"));
    }
    let models = corpus.models();
    let layout = options.layout(models);
    let train = sample_training(corpus, options.train_size, options.seed)?;
    let validation = corpus.utterances(Split::Validation);
    for dataset_id in corpus.manifest.dataset_ids() {
        if !validation.iter().any(|u| u.dataset_id == dataset_id) {
            return Err(Error::validation(format!(
                "dataset `{dataset_id}` has no validation utterances"
            )));
        }
    }
    let all: Vec<LabeledUtterance<'_>> = train.iter().chain(&validation).copied().collect();
    let table = StreamTable::new(&all, &layout.models, options.layer_id)?;
    let val_datasets: Vec<&str> = validation.iter().map(|u| u.dataset_id).collect();
    let n_classes = corpus.num_models();

    let groups = group_by_temperature(&configs);
    let pool = thread_pool(workers)?;
    let per_group: Vec<Vec<(usize, ConfigOutcome)>> = pool.install(|| {
        groups
            .par_iter()
            .map(|group| -> Result<Vec<(usize, ConfigOutcome)>> {
                let conf = group_confidences(group, &table)?;
                group
                    .configs
                    .par_iter()
                    .zip(conf.par_iter())
                    .map(|((idx, _, _), matrix)| {
                        let tr = feature_vectors(matrix, table.n_models, 0, &train, &layout)?;
                        let va =
                            feature_vectors(matrix, table.n_models, train.len(), &validation, &layout)?;
                        let outcome = fit_and_score(&tr, &va, &val_datasets, n_classes, &lr_points)?;
                        Ok((*idx, outcome))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut outcomes: Vec<Option<ConfigOutcome>> = (0..configs.len()).map(|_| None).collect();
    for (idx, o) in per_group.into_iter().flatten() {
        outcomes[idx] = Some(o);
    }
    let outcomes: Vec<ConfigOutcome> = outcomes
        .into_iter()
        .map(|o| o.ok_or_else(|| Error::Internal("grid point without outcome".into())))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by(|&a, &b| outcomes[b].a_avg.total_cmp(&outcomes[a].a_avg).then(a.cmp(&b)));

    let mut per_dataset_best: BTreeMap<String, PerDatasetBest> = BTreeMap::new();
    for (idx, o) in outcomes.iter().enumerate() {
        for (d, &acc) in &o.per_dataset {
            let better = per_dataset_best.get(d).is_none_or(|b| acc > b.accuracy);
            if better {
                per_dataset_best.insert(
                    d.clone(),
                    PerDatasetBest {
                        config: configs[idx],
                        accuracy: acc,
                    },
                );
            }
        }
    }

    let best_idx = order[0];
    let mut best_selector = outcomes[best_idx].selector.clone();
    best_selector.layout = Some(layout.clone());
    best_selector.confidence = (!layout.models.is_empty()).then_some(configs[best_idx]);
    let leaderboard = order
        .iter()
        .map(|&i| LeaderboardEntry {
            config: configs[i],
            a_avg: outcomes[i].a_avg,
            per_dataset_accuracy: outcomes[i].per_dataset.clone(),
            l2_lambda: outcomes[i].params.l2_lambda,
            class_weighting: outcomes[i].params.class_weighting.clone(),
        })
        .collect();
    Ok(TuningResult {
        best_config: configs[best_idx],
        best_selector,
        validation_a_avg: outcomes[best_idx].a_avg,
        leaderboard,
        per_dataset_best,
        train_size: options.train_size,
        seed: options.seed,
    })
}

/// Feature vectors for `utterances` under a confidence config and layout.
pub fn features_for(
    utterances: &[LabeledUtterance<'_>],
    cfg: &ConfidenceConfig,
    layout: &FeatureLayout,
) -> Result<Vec<FeatureVector>> {
    let conf = if layout.models.is_empty() {
        BTreeMap::new()
    } else {
        crate::confidence::confidence_vectors(utterances, &layout.models, cfg, layout.layer_id)?
    };
    assemble_features(&conf, utterances, layout)
}

/// Trains one selector on `N` sampled training utterances per dataset.
pub fn train_on_corpus(
    corpus: &Corpus,
    cfg: &ConfidenceConfig,
    layout: &FeatureLayout,
    train_size: usize,
    seed: u64,
    params: &TrainParams,
) -> Result<SelectorModel> {
    let train = sample_training(corpus, train_size, seed)?;
    let fv = features_for(&train, cfg, layout)?;
    let mut model = train_selector(&fv, corpus.num_models(), params)?;
    model.layout = Some(layout.clone());
    model.confidence = (!layout.models.is_empty()).then_some(*cfg);
    Ok(model)
}

/// Predictions of `selector` on one split, using its recorded layout.
pub fn predict_split(
    corpus: &Corpus,
    split: Split,
    selector: &SelectorModel,
) -> Result<BTreeMap<String, usize>> {
    let layout = selector
        .layout
        .as_ref()
        .ok_or_else(|| Error::LayoutMismatch("selector has no recorded feature layout".into()))?;
    if layout.models.iter().any(|m| corpus.manifest.model_index(m).is_none()) {
        return Err(Error::LayoutMismatch(format!(
            "selector expects models {:?}, corpus has {:?}",
            layout.models,
            corpus.models()
        )));
    }
    let cfg = match (&selector.confidence, layout.models.is_empty()) {
        (Some(c), _) => *c,
        (None, true) => ConfidenceConfig::default_preset(),
        (None, false) => {
            return Err(Error::LayoutMismatch(
                "selector has confidence columns but no confidence config".into(),
            ))
        }
    };
    let utterances = corpus.utterances(split);
    if utterances.is_empty() {
        return Err(Error::validation(format!("split `{}` is empty", split.as_str())));
    }
    let fv = features_for(&utterances, &cfg, layout)?;
    selector.predict_all(&fv)
}

/// Evaluates `selector` on `split` with the confidence config it was trained with.
pub fn evaluate_config(
    corpus: &Corpus,
    cfg: &ConfidenceConfig,
    selector: &SelectorModel,
    split: Split,
) -> Result<EvaluationReport> {
    if let Some(recorded) = &selector.confidence {
        if recorded != cfg {
            return Err(Error::LayoutMismatch(format!(
                "selector was trained with confidence {recorded}, evaluation requested {cfg}"
            )));
        }
    }
    let mut sel = selector.clone();
    if sel.confidence.is_none() && sel.layout.as_ref().is_some_and(|l| !l.models.is_empty()) {
        sel.confidence = Some(*cfg);
    }
    let predictions = predict_split(corpus, split, &sel)?;
    EvaluationReport::build(corpus, split, &predictions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_space_has_2960_configs() {
        let all = enumerate_space(&SearchSpace::default());
        assert_eq!(all.len(), 2960);
        let max_prob = all.iter().filter(|c| c.measure == Measure::MaxProb).count();
        assert_eq!(max_prob, 80);
    }

    #[test]
    fn max_prob_only_space() {
        let space = SearchSpace::default().with_measures(&[Measure::MaxProb]);
        let all = enumerate_space(&space);
        assert_eq!(all.len(), 80);
        assert!(all.iter().all(|c| c.alpha == 1.0 && c.normalization == Normalization::Linear));
    }

    #[test]
    fn single_point_space() {
        let cfg = ConfidenceConfig::default_preset();
        assert_eq!(enumerate_space(&SearchSpace::single(&cfg)), vec![cfg]);
    }

    #[test]
    fn enumeration_is_canonical() {
        let mut space = SearchSpace::default();
        space.temperatures.reverse();
        space.measures.reverse();
        space.aggregations.reverse();
        assert_eq!(enumerate_space(&space), enumerate_space(&SearchSpace::default()));
    }

    #[test]
    fn lr_grid_default_points() {
        assert_eq!(LrGrid::default().points().len(), 10);
    }
}
