//! Seeded synthetic multi-expert corpora.
//!
//! Every dataset has one matched model. Per utterance a reference token
//! sequence is drawn; each model corrupts it at its own error rate and emits
//! it with blanks interleaved. Each emission step gets a logit vector whose
//! emitted-token entry is drawn from `Normal(gain * mu, noise)` and all other
//! entries from `Normal(0, noise)`, where `mu` is the model's match quality on
//! the dataset. Mismatched models have their logits multiplied by
//! `1 + overconfidence`. Intermediate layers scale the final logits by a
//! degradation factor and add independent noise.
//!
//! Randomness comes from ChaCha20 ([`RNG_NAME`]): one base key from the seed,
//! and one 64-bit stream id per (purpose, dataset, split, utterance, model,
//! layer), so generation order and parallelism never change the output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::keyed_rng;
use crate::probstream::{
    io, write_corpus, Corpus, CorpusManifest, DatasetEntry, Hypothesis, ProbabilityStream, Split,
    Step, StreamKind, UtteranceRecord,
};

pub const RNG_NAME: &str = "chacha20-keyed-streams-v1";
pub const SIM_SPEC_FILE: &str = "sim_spec.json";
pub const BLANK_INDEX: usize = 0;
pub const PRESET_NAMES: [&str; 4] = ["overconfident", "short_audio", "domain_shift", "layered"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimDataset {
    pub dataset_id: String,
    /// Index into [`SimSpec::models`] of the matched (correct) model.
    pub matched_model: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    fn iter(&self) -> impl Iterator<Item = (Split, usize)> {
        [
            (Split::Train, self.train),
            (Split::Validation, self.validation),
            (Split::Test, self.test),
        ]
        .into_iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub layer_id: u32,
    /// Logit scale in `(0, 1]`; `1` reproduces the final layer.
    pub degradation: f64,
}

fn default_gain() -> f64 {
    8.0
}

fn default_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub seed: u64,
    pub models: Vec<String>,
    pub datasets: Vec<SimDataset>,
    pub utterances_per_split: SplitSizes,
    /// Token `0` is the blank.
    pub vocab_size: usize,
    /// Inclusive range of the target number of emission steps per utterance.
    pub steps_range: [usize; 2],
    pub frame_rate_hz: f64,
    /// `datasets x models` peakedness in `(0, 1)`.
    pub match_quality: Vec<Vec<f64>>,
    pub blank_rate: f64,
    pub overconfidence: f64,
    /// `datasets x models` per-token corruption probability.
    pub error_rate: Vec<Vec<f64>>,
    /// Auxiliary posterior source to emit (e.g. `"lid"`), if any.
    #[serde(default)]
    pub aux_source: Option<String>,
    /// Mixing weight of random noise in the auxiliary posteriors.
    #[serde(default)]
    pub aux_noise: f64,
    /// Extra layers; layer 0 (final) is always generated.
    #[serde(default)]
    pub intermediate_layers: Vec<LayerSpec>,
    #[serde(default = "default_gain")]
    pub logit_gain: f64,
    #[serde(default = "default_noise")]
    pub logit_noise: f64,
    /// Peakedness of blank steps, shared by every model; `None` uses the
    /// match quality like any other token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blank_quality: Option<f64>,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        let m = self.models.len();
        let d = self.datasets.len();
        let bad = |msg: String| Err(Error::validation(format!("sim spec: {msg}")));
        if m < 2 {
            return bad(format!("need at least 2 models, got {m}"));
        }
        if d < 2 {
            return bad(format!("need at least 2 datasets, got {d}"));
        }
        if self.vocab_size < 3 {
            return bad(format!("vocab_size must be >= 3, got {}", self.vocab_size));
        }
        let [lo, hi] = self.steps_range;
        if lo == 0 || lo > hi {
            return bad(format!("invalid steps_range [{lo}, {hi}]"));
        }
        if !(self.frame_rate_hz.is_finite() && self.frame_rate_hz > 0.0) {
            return bad("frame_rate_hz must be positive".into());
        }
        if !(0.0..1.0).contains(&self.blank_rate) {
            return bad(format!("blank_rate {} outside [0, 1)", self.blank_rate));
        }
        if !(self.overconfidence.is_finite() && self.overconfidence >= 0.0) {
            return bad("overconfidence must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.aux_noise) {
            return bad(format!("aux_noise {} outside [0, 1]", self.aux_noise));
        }
        if !(self.logit_gain > 0.0 && self.logit_noise > 0.0) {
            return bad("logit_gain and logit_noise must be positive".into());
        }
        if let Some(q) = self.blank_quality {
            if !(q > 0.0 && q < 1.0) {
                return bad(format!("blank_quality {q} outside (0, 1)"));
            }
        }
        if self.match_quality.len() != d || self.match_quality.iter().any(|r| r.len() != m) {
            return bad(format!("match_quality must be {d} x {m}"));
        }
        if self.error_rate.len() != d || self.error_rate.iter().any(|r| r.len() != m) {
            return bad(format!("error_rate must be {d} x {m}"));
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, ds) in self.datasets.iter().enumerate() {
            if !ids.insert(&ds.dataset_id) {
                return bad(format!("duplicate dataset `{}`", ds.dataset_id));
            }
            if ds.matched_model >= m {
                return bad(format!("dataset `{}` matched_model out of range", ds.dataset_id));
            }
            let row = &self.match_quality[i];
            if row.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
                return bad(format!("match_quality of `{}` outside (0, 1)", ds.dataset_id));
            }
            let best = row[ds.matched_model];
            if row
                .iter()
                .enumerate()
                .any(|(k, &q)| k != ds.matched_model && q >= best)
            {
                return bad(format!(
                    "dataset `{}`: matched model must have strictly highest match_quality",
                    ds.dataset_id
                ));
            }
            if self.error_rate[i].iter().any(|&e| !(0.0..=1.0).contains(&e)) {
                return bad(format!("error_rate of `{}` outside [0, 1]", ds.dataset_id));
            }
        }
        let mut layers = std::collections::BTreeSet::new();
        for l in &self.intermediate_layers {
            if !(l.degradation > 0.0 && l.degradation <= 1.0) {
                return bad(format!("layer {} degradation outside (0, 1]", l.layer_id));
            }
            if !layers.insert(l.layer_id) {
                return bad(format!("layer {} listed twice", l.layer_id));
            }
            if l.layer_id == 0 && l.degradation != 1.0 {
                return bad("layer 0 is the final layer and must have degradation 1".into());
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SimSpec> {
        let spec: SimSpec = serde_json::from_str(text).map_err(|e| Error::json("sim spec", e))?;
        spec.validate()?;
        Ok(spec)
    }

    /// A spec with `m` models and `m` datasets, dataset `i` matched to model `i`.
    pub fn diagonal(m: usize, matched: f64, mismatched: f64) -> SimSpec {
        let models: Vec<String> = (1..=m).map(|i| format!("m{i}")).collect();
        let datasets = (0..m)
            .map(|i| SimDataset {
                dataset_id: format!("d{}", i + 1),
                matched_model: i,
            })
            .collect();
        let match_quality = (0..m)
            .map(|i| (0..m).map(|k| if i == k { matched } else { mismatched }).collect())
            .collect();
        SimSpec {
            seed: 42,
            models,
            datasets,
            utterances_per_split: SplitSizes {
                train: 100,
                validation: 100,
                test: 0,
            },
            vocab_size: 12,
            steps_range: [20, 60],
            frame_rate_hz: 10.0,
            match_quality,
            blank_rate: 0.3,
            overconfidence: 0.0,
            error_rate: vec![vec![0.1; m]; m],
            aux_source: None,
            aux_noise: 0.0,
            intermediate_layers: Vec::new(),
            logit_gain: default_gain(),
            logit_noise: default_noise(),
            blank_quality: None,
        }
    }
}

/// Documented scenario specs, all with seed 42.
pub fn stress_preset(name: &str) -> Result<SimSpec> {
    let spec = match name {
        // CTC-like streams: most steps are blanks that every model emits with
        // the same confidence, and mismatched experts are sharpened. Including
        // blanks in a product of maximum probabilities buries the token steps.
        "overconfident" => {
            let mut s = SimSpec::diagonal(5, 0.9, 0.5);
            s.utterances_per_split = SplitSizes {
                train: 100,
                validation: 500,
                test: 100,
            };
            s.overconfidence = 0.5;
            s.blank_rate = 0.7;
            s.blank_quality = Some(0.9);
            s.steps_range = [10, 120];
            s
        }
        // Long utterances for duration sweeps, plus noisy LID-like posteriors.
        "short_audio" => {
            let mut s = SimSpec::diagonal(5, 0.5, 0.43);
            s.utterances_per_split = SplitSizes {
                train: 100,
                validation: 300,
                test: 0,
            };
            s.vocab_size = 10;
            s.steps_range = [30, 300];
            s.aux_source = Some("lid".into());
            s.aux_noise = 0.65;
            s
        }
        // Base model vs finetuned model: two source-domain datasets, one target.
        "domain_shift" => {
            let models = vec!["base".to_string(), "finetuned".to_string()];
            let datasets = vec![
                SimDataset {
                    dataset_id: "source_a".into(),
                    matched_model: 0,
                },
                SimDataset {
                    dataset_id: "source_b".into(),
                    matched_model: 0,
                },
                SimDataset {
                    dataset_id: "target".into(),
                    matched_model: 1,
                },
            ];
            SimSpec {
                seed: 42,
                models,
                datasets,
                utterances_per_split: SplitSizes {
                    train: 100,
                    validation: 300,
                    test: 100,
                },
                vocab_size: 12,
                steps_range: [10, 40],
                frame_rate_hz: 10.0,
                match_quality: vec![vec![0.55, 0.5], vec![0.55, 0.5], vec![0.45, 0.55]],
                blank_rate: 0.3,
                overconfidence: 0.0,
                error_rate: vec![vec![0.05, 0.1], vec![0.05, 0.12], vec![0.3, 0.08]],
                aux_source: None,
                aux_noise: 0.0,
                intermediate_layers: Vec::new(),
                logit_gain: default_gain(),
                logit_noise: default_noise(),
            blank_quality: None,
            }
        }
        "layered" => {
            let mut s = SimSpec::diagonal(3, 0.6, 0.47);
            s.utterances_per_split = SplitSizes {
                train: 100,
                validation: 300,
                test: 0,
            };
            s.intermediate_layers = vec![
                LayerSpec {
                    layer_id: 4,
                    degradation: 0.5,
                },
                LayerSpec {
                    layer_id: 9,
                    degradation: 0.75,
                },
                LayerSpec {
                    layer_id: 0,
                    degradation: 1.0,
                },
            ];
            s
        }
        other => {
            return Err(Error::validation(format!(
                "unknown preset `{other}` (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

// Substream purposes.
const TAG_UTTERANCE: u64 = 1;
const TAG_MODEL: u64 = 2;
const TAG_LAYER: u64 = 3;

fn split_code(split: Split) -> u64 {
    match split {
        Split::Train => 0,
        Split::Validation => 1,
        Split::Test => 2,
    }
}

struct UtteranceJob {
    dataset: usize,
    split: Split,
    index: usize,
}

fn render(tokens: &[usize]) -> Vec<String> {
    tokens.iter().map(|t| t.to_string()).collect()
}

/// Substitutes, deletes or inserts each token with probability `rate`.
fn corrupt(reference: &[usize], rate: f64, vocab: usize, rng: &mut ChaCha20Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(reference.len() + 4);
    for &tok in reference {
        if rng.random::<f64>() >= rate {
            out.push(tok);
            continue;
        }
        match rng.random_range(0..3) {
            0 => {
                let mut sub = rng.random_range(1..vocab - 1);
                if sub >= tok {
                    sub += 1;
                }
                out.push(sub);
            }
            1 => {}
            _ => {
                out.push(tok);
                out.push(rng.random_range(1..vocab));
            }
        }
    }
    out
}

impl SimSpec {
    fn generate(&self, job: &UtteranceJob) -> UtteranceRecord {
        let ds = &self.datasets[job.dataset];
        let utterance_id = format!("{}-{}-{:05}", ds.dataset_id, job.split.as_str(), job.index);
        let base_key = [job.dataset as u64, split_code(job.split), job.index as u64];
        let mut urng = keyed_rng(self.seed, &[TAG_UTTERANCE, base_key[0], base_key[1], base_key[2]]);
        let [lo, hi] = self.steps_range;
        let target_steps = urng.random_range(lo..=hi);
        let ref_len = ((target_steps as f64 * (1.0 - self.blank_rate)).round() as usize).max(1);
        let reference: Vec<usize> = (0..ref_len)
            .map(|_| urng.random_range(1..self.vocab_size))
            .collect();

        let aux_scores = self.aux_source.as_ref().map(|source| {
            let m = self.models.len();
            let noise: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut urng)).collect();
            let total: f64 = noise.iter().sum();
            let post = (0..m)
                .map(|k| {
                    let one_hot = if k == ds.matched_model { 1.0 } else { 0.0 };
                    (1.0 - self.aux_noise) * one_hot + self.aux_noise * noise[k] / total
                })
                .collect();
            BTreeMap::from([(source.clone(), post)])
        });

        let noise = Normal::new(0.0, self.logit_noise).expect("validated noise");
        let hypotheses = self
            .models
            .iter()
            .enumerate()
            .map(|(k, model_id)| {
                let mut mrng = keyed_rng(
                    self.seed,
                    &[TAG_MODEL, base_key[0], base_key[1], base_key[2], k as u64],
                );
                let hyp = corrupt(
                    &reference,
                    self.error_rate[job.dataset][k],
                    self.vocab_size,
                    &mut mrng,
                );
                let mut emitted = Vec::with_capacity(hyp.len() * 2);
                for &tok in &hyp {
                    while mrng.random::<f64>() < self.blank_rate {
                        emitted.push(BLANK_INDEX);
                    }
                    emitted.push(tok);
                }
                if emitted.is_empty() {
                    emitted.push(BLANK_INDEX);
                }
                let token_peak = self.logit_gain * self.match_quality[job.dataset][k];
                let blank_peak = self
                    .blank_quality
                    .map_or(token_peak, |q| self.logit_gain * q);
                let scale = if k == ds.matched_model {
                    1.0
                } else {
                    1.0 + self.overconfidence
                };
                let steps: Vec<Step> = emitted
                    .iter()
                    .map(|&tok| {
                        let values = (0..self.vocab_size)
                            .map(|j| {
                                let mean = match (j == tok, tok == BLANK_INDEX) {
                                    (false, _) => 0.0,
                                    (true, true) => blank_peak,
                                    (true, false) => token_peak,
                                };
                                (mean + noise.sample(&mut mrng)) * scale
                            })
                            .collect();
                        Step {
                            values,
                            emitted_token: tok,
                        }
                    })
                    .collect();
                let final_stream = ProbabilityStream {
                    utterance_id: utterance_id.clone(),
                    model_id: model_id.clone(),
                    layer_id: 0,
                    frame_rate_hz: self.frame_rate_hz,
                    vocab_size: self.vocab_size,
                    blank_index: BLANK_INDEX,
                    kind: StreamKind::Logits,
                    steps,
                };
                let mut streams = Vec::with_capacity(1 + self.intermediate_layers.len());
                for layer in self.intermediate_layers.iter().filter(|l| l.layer_id != 0) {
                    let mut lrng = keyed_rng(
                        self.seed,
                        &[
                            TAG_LAYER,
                            base_key[0],
                            base_key[1],
                            base_key[2],
                            k as u64,
                            u64::from(layer.layer_id),
                        ],
                    );
                    let extra = Normal::new(0.0, self.logit_noise * (1.0 - layer.degradation))
                        .expect("validated degradation");
                    let mut s = final_stream.clone();
                    s.layer_id = layer.layer_id;
                    for step in s.steps.iter_mut() {
                        for v in step.values.iter_mut() {
                            *v = *v * layer.degradation + extra.sample(&mut lrng);
                        }
                    }
                    streams.push(s);
                }
                streams.push(final_stream);
                streams.sort_by_key(|s| s.layer_id);
                (
                    model_id.clone(),
                    Hypothesis {
                        hypothesis_words: render(&hyp),
                        streams,
                    },
                )
            })
            .collect();

        UtteranceRecord {
            utterance_id,
            dataset_id: ds.dataset_id.clone(),
            reference_words: render(&reference),
            hypotheses,
            aux_scores,
        }
    }
}

/// Generates the corpus described by `spec`, fully determined by its seed.
pub fn simulate(spec: &SimSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut entries = Vec::new();
    let mut parts = Vec::new();
    for (d, ds) in spec.datasets.iter().enumerate() {
        for (split, count) in spec.utterances_per_split.iter() {
            if count == 0 {
                continue;
            }
            let records: Vec<UtteranceRecord> = (0..count)
                .into_par_iter()
                .map(|index| {
                    spec.generate(&UtteranceJob {
                        dataset: d,
                        split,
                        index,
                    })
                })
                .collect();
            entries.push(DatasetEntry {
                dataset_id: ds.dataset_id.clone(),
                correct_model_id: spec.models[ds.matched_model].clone(),
                split,
                records: format!("records/{}.{}.jsonl", ds.dataset_id, split.as_str()),
            });
            parts.push(records);
        }
    }
    let manifest = CorpusManifest {
        models: spec.models.clone(),
        datasets: entries,
    };
    Corpus::new(manifest, parts)
}

/// Simulates and writes the corpus plus a copy of the spec to `dir`.
pub fn simulate_to_dir(spec: &SimSpec, dir: &Path) -> Result<Corpus> {
    let corpus = simulate(spec)?;
    write_corpus(&corpus, dir)?;
    io::write_json(&dir.join(SIM_SPEC_FILE), spec)?;
    Ok(corpus)
}
