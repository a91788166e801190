//! Model-agnostic data model for recognizer outputs.
//!
//! A [`ProbabilityStream`] holds the per-step output distributions of one
//! model (optionally one intermediate layer) on one utterance. One step is one
//! decoder emission, blank emissions included. Layer `0` is the final layer.

pub(crate) mod io;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, read_manifest, write_corpus, MANIFEST_FILE};

/// Tolerance on the per-step sum of a probability vector.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

/// Whether [`Step::values`] hold raw logits or normalized probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Logits,
    Probabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub values: Vec<f64>,
    /// Token emitted by the decoder at this step; the blank index for blank steps.
    pub emitted_token: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityStream {
    pub utterance_id: String,
    pub model_id: String,
    /// `0` denotes the final layer.
    pub layer_id: u32,
    pub frame_rate_hz: f64,
    pub vocab_size: usize,
    pub blank_index: usize,
    pub kind: StreamKind,
    pub steps: Vec<Step>,
}

impl ProbabilityStream {
    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| {
            Error::record(
                &self.utterance_id,
                format!("model `{}` layer {}: {msg}", self.model_id, self.layer_id),
            )
        };
        if self.vocab_size == 0 {
            return Err(ctx("vocab_size must be positive".into()));
        }
        if self.blank_index >= self.vocab_size {
            return Err(ctx(format!(
                "blank_index {} out of range for vocab_size {}",
                self.blank_index, self.vocab_size
            )));
        }
        if !(self.frame_rate_hz.is_finite() && self.frame_rate_hz > 0.0) {
            return Err(ctx(format!(
                "frame_rate_hz must be positive, got {}",
                self.frame_rate_hz
            )));
        }
        if self.steps.is_empty() {
            return Err(ctx("steps must be non-empty".into()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.values.len() != self.vocab_size {
                return Err(ctx(format!(
                    "step {i}: values has length {}, expected vocab_size {}",
                    step.values.len(),
                    self.vocab_size
                )));
            }
            if step.emitted_token >= self.vocab_size {
                return Err(ctx(format!(
                    "step {i}: emitted_token {} out of range",
                    step.emitted_token
                )));
            }
            if let Some(j) = step.values.iter().position(|v| !v.is_finite()) {
                return Err(ctx(format!("step {i}: values[{j}] is not finite")));
            }
            if self.kind == StreamKind::Probabilities {
                if let Some(j) = step.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
                    return Err(ctx(format!(
                        "step {i}: probability values[{j}] = {} outside [0, 1]",
                        step.values[j]
                    )));
                }
                let sum: f64 = step.values.iter().sum();
                if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    return Err(ctx(format!(
                        "step {i}: probabilities sum to {sum}, expected 1 within {PROBABILITY_SUM_TOLERANCE}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_blank(&self, step: &Step) -> bool {
        step.emitted_token == self.blank_index
    }

    /// Number of steps covering `duration_s` seconds of audio.
    pub fn steps_for_duration(&self, duration_s: f64) -> usize {
        let exact = duration_s * self.frame_rate_hz;
        // 0.3 * 10.0 must give 3 steps, not 4
        let rounded = exact.round();
        let n = if (exact - rounded).abs() < 1e-9 {
            rounded
        } else {
            exact.ceil()
        };
        (n as usize).max(1)
    }

    /// Keeps the first `ceil(duration_s * frame_rate_hz)` steps.
    ///
    /// Streams that are already short enough come back unchanged.
    pub fn truncate(&self, duration_s: f64) -> Result<ProbabilityStream> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(Error::validation(format!(
                "truncation duration must be positive, got {duration_s}"
            )));
        }
        let keep = self.steps_for_duration(duration_s);
        let mut out = self.clone();
        out.steps.truncate(keep);
        Ok(out)
    }
}

/// A model's decoded output on one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub hypothesis_words: Vec<String>,
    /// One stream per layer, unique by `layer_id`, sorted ascending.
    pub streams: Vec<ProbabilityStream>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub utterance_id: String,
    pub dataset_id: String,
    /// Empty when the transcript is unknown.
    pub reference_words: Vec<String>,
    pub hypotheses: BTreeMap<String, Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_scores: Option<BTreeMap<String, Vec<f64>>>,
}

impl UtteranceRecord {
    /// Checks the record against the manifest's model list and sorts streams by layer.
    pub fn validate(&mut self, models: &[String]) -> Result<()> {
        if self.utterance_id.is_empty() {
            return Err(Error::validation("record with empty utterance_id"));
        }
        for (model_id, hyp) in self.hypotheses.iter_mut() {
            if !models.iter().any(|m| m == model_id) {
                return Err(Error::record(
                    &self.utterance_id,
                    format!("unknown model_id `{model_id}` in hypotheses"),
                ));
            }
            hyp.streams.sort_by_key(|s| s.layer_id);
            let mut seen = BTreeSet::new();
            for stream in &hyp.streams {
                if stream.utterance_id != self.utterance_id {
                    return Err(Error::record(
                        &self.utterance_id,
                        format!(
                            "stream utterance_id `{}` does not match record",
                            stream.utterance_id
                        ),
                    ));
                }
                if &stream.model_id != model_id {
                    return Err(Error::record(
                        &self.utterance_id,
                        format!(
                            "stream model_id `{}` filed under hypothesis `{model_id}`",
                            stream.model_id
                        ),
                    ));
                }
                if !seen.insert(stream.layer_id) {
                    return Err(Error::record(
                        &self.utterance_id,
                        format!("model `{model_id}` has duplicate layer_id {}", stream.layer_id),
                    ));
                }
                stream.validate()?;
            }
        }
        if let Some(aux) = &self.aux_scores {
            for (source, values) in aux {
                if let Some(j) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::record(
                        &self.utterance_id,
                        format!("aux_scores `{source}`[{j}] is not finite"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn layers(&self, model_id: &str) -> Vec<u32> {
        self.hypotheses
            .get(model_id)
            .map(|h| h.streams.iter().map(|s| s.layer_id).collect())
            .unwrap_or_default()
    }

    pub fn select_layer(&self, model_id: &str, layer_id: u32) -> Result<&ProbabilityStream> {
        self.hypotheses
            .get(model_id)
            .and_then(|h| h.streams.iter().find(|s| s.layer_id == layer_id))
            .ok_or_else(|| Error::MissingLayer {
                model_id: model_id.to_string(),
                requested: layer_id,
                available: self.layers(model_id),
            })
    }

    pub fn has_reference(&self) -> bool {
        !self.reference_words.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::validation(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub dataset_id: String,
    pub correct_model_id: String,
    pub split: Split,
    /// Record file path, relative to the manifest.
    pub records: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    /// Defines the model index order used everywhere else.
    pub models: Vec<String>,
    pub datasets: Vec<DatasetEntry>,
}

impl CorpusManifest {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::validation("manifest lists no models"));
        }
        let mut seen = BTreeSet::new();
        for m in &self.models {
            if !seen.insert(m) {
                return Err(Error::validation(format!("duplicate model_id `{m}` in manifest")));
            }
        }
        let mut labels: BTreeMap<&str, &str> = BTreeMap::new();
        let mut parts = BTreeSet::new();
        for d in &self.datasets {
            if !self.models.contains(&d.correct_model_id) {
                return Err(Error::validation(format!(
                    "dataset `{}`: correct_model_id `{}` is not a manifest model",
                    d.dataset_id, d.correct_model_id
                )));
            }
            if let Some(prev) = labels.insert(&d.dataset_id, &d.correct_model_id) {
                if prev != d.correct_model_id {
                    return Err(Error::validation(format!(
                        "dataset `{}` maps to both `{prev}` and `{}`",
                        d.dataset_id, d.correct_model_id
                    )));
                }
            }
            if !parts.insert((&d.dataset_id, d.split)) {
                return Err(Error::validation(format!(
                    "dataset `{}` split `{}` listed twice",
                    d.dataset_id,
                    d.split.as_str()
                )));
            }
        }
        Ok(())
    }

    pub fn model_index(&self, model_id: &str) -> Option<usize> {
        self.models.iter().position(|m| m == model_id)
    }

    /// Index of the designated correct model for a dataset.
    pub fn label(&self, dataset_id: &str) -> Option<usize> {
        self.datasets
            .iter()
            .find(|d| d.dataset_id == dataset_id)
            .and_then(|d| self.model_index(&d.correct_model_id))
    }

    /// Sorted, de-duplicated dataset ids.
    pub fn dataset_ids(&self) -> Vec<String> {
        let ids: BTreeSet<&String> = self.datasets.iter().map(|d| &d.dataset_id).collect();
        ids.into_iter().cloned().collect()
    }

    /// Models that are not the correct model for any dataset.
    pub fn unmapped_models(&self) -> Vec<&str> {
        self.models
            .iter()
            .filter(|m| !self.datasets.iter().any(|d| &d.correct_model_id == *m))
            .map(String::as_str)
            .collect()
    }
}

/// A loaded corpus: the manifest plus the records of each manifest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    /// `parts[i]` holds the records of `manifest.datasets[i]`.
    pub parts: Vec<Vec<UtteranceRecord>>,
}

/// One utterance together with its dataset label.
#[derive(Debug, Clone, Copy)]
pub struct LabeledUtterance<'a> {
    pub dataset_id: &'a str,
    pub label: usize,
    pub record: &'a UtteranceRecord,
}

impl Corpus {
    /// Validates every invariant and canonicalizes stream order.
    pub fn new(manifest: CorpusManifest, mut parts: Vec<Vec<UtteranceRecord>>) -> Result<Self> {
        manifest.validate()?;
        if parts.len() != manifest.datasets.len() {
            return Err(Error::validation(format!(
                "{} record groups for {} manifest entries",
                parts.len(),
                manifest.datasets.len()
            )));
        }
        let mut ids = BTreeSet::new();
        let mut aux_dims: BTreeMap<String, usize> = BTreeMap::new();
        for (entry, records) in manifest.datasets.iter().zip(parts.iter_mut()) {
            for record in records.iter_mut() {
                if record.dataset_id != entry.dataset_id {
                    return Err(Error::record(
                        &record.utterance_id,
                        format!(
                            "dataset_id `{}` listed under dataset `{}`",
                            record.dataset_id, entry.dataset_id
                        ),
                    ));
                }
                record.validate(&manifest.models)?;
                if !ids.insert(record.utterance_id.clone()) {
                    return Err(Error::record(&record.utterance_id, "duplicate utterance_id"));
                }
                if let Some(aux) = &record.aux_scores {
                    for (source, values) in aux {
                        let dim = *aux_dims.entry(source.clone()).or_insert(values.len());
                        if dim != values.len() {
                            return Err(Error::record(
                                &record.utterance_id,
                                format!(
                                    "aux_scores `{source}` has length {}, corpus uses {dim}",
                                    values.len()
                                ),
                            ));
                        }
                    }
                }
            }
        }
        for m in manifest.unmapped_models() {
            log::warn!("model `{m}` is not the correct model for any dataset");
        }
        Ok(Corpus { manifest, parts })
    }

    pub fn models(&self) -> &[String] {
        &self.manifest.models
    }

    pub fn num_models(&self) -> usize {
        self.manifest.models.len()
    }

    /// Entries of one split, sorted by dataset id.
    pub fn split_parts(&self, split: Split) -> Vec<(&DatasetEntry, &[UtteranceRecord])> {
        let mut out: Vec<_> = self
            .manifest
            .datasets
            .iter()
            .zip(&self.parts)
            .filter(|(e, _)| e.split == split)
            .map(|(e, r)| (e, r.as_slice()))
            .collect();
        out.sort_by(|a, b| a.0.dataset_id.cmp(&b.0.dataset_id));
        out
    }

    /// Every utterance of a split in canonical order (dataset id, then file order).
    pub fn utterances(&self, split: Split) -> Vec<LabeledUtterance<'_>> {
        self.split_parts(split)
            .into_iter()
            .flat_map(|(entry, records)| {
                let label = self
                    .manifest
                    .model_index(&entry.correct_model_id)
                    .expect("validated manifest");
                records.iter().map(move |record| LabeledUtterance {
                    dataset_id: &entry.dataset_id,
                    label,
                    record,
                })
            })
            .collect()
    }

    pub fn record(&self, utterance_id: &str) -> Option<&UtteranceRecord> {
        self.parts
            .iter()
            .flatten()
            .find(|r| r.utterance_id == utterance_id)
    }

    /// Applies `f` to every stream in the corpus, e.g. for truncation.
    pub fn map_streams<F>(&self, mut f: F) -> Result<Corpus>
    where
        F: FnMut(&ProbabilityStream) -> Result<ProbabilityStream>,
    {
        let mut parts = self.parts.clone();
        for record in parts.iter_mut().flatten() {
            for hyp in record.hypotheses.values_mut() {
                for stream in hyp.streams.iter_mut() {
                    *stream = f(stream)?;
                }
            }
        }
        Ok(Corpus {
            manifest: self.manifest.clone(),
            parts,
        })
    }

    /// Copy of the corpus with every stream truncated to `duration_s` seconds.
    pub fn truncated(&self, duration_s: f64) -> Result<Corpus> {
        self.map_streams(|s| s.truncate(duration_s))
    }
}
