//! Selection accuracy and word error rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probstream::{Corpus, Split};

pub const ENSEMBLE_SYSTEM: &str = "ensemble";
pub const ORACLE_SYSTEM: &str = "oracle";

/// Edit counts of one alignment (or a sum of alignments).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WerCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_words: usize,
}

impl WerCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// `(S + D + I) / N`; `0` for an empty accumulation.
    pub fn wer(&self) -> f64 {
        if self.reference_words == 0 {
            0.0
        } else {
            self.errors() as f64 / self.reference_words as f64
        }
    }
}

impl std::ops::AddAssign for WerCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.substitutions += rhs.substitutions;
        self.deletions += rhs.deletions;
        self.insertions += rhs.insertions;
        self.reference_words += rhs.reference_words;
    }
}

/// Minimal-edit alignment counts between two token sequences.
///
/// Backtrace prefers substitution (or match), then deletion, then insertion.
pub fn edit_counts<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> WerCounts {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        d[i * width] = i;
        for j in 1..=m {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            let diag = d[(i - 1) * width + j - 1] + cost;
            let del = d[(i - 1) * width + j] + 1;
            let ins = d[i * width + j - 1] + 1;
            d[i * width + j] = diag.min(del).min(ins);
        }
    }
    let mut counts = WerCounts {
        reference_words: n,
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            if here == d[(i - 1) * width + j - 1] + cost {
                counts.substitutions += cost;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

/// Word error rate of one utterance. The reference must be non-empty.
pub fn wer<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Result<WerCounts> {
    if reference.is_empty() {
        return Err(Error::validation("WER is undefined for an empty reference"));
    }
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let h: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();
    Ok(edit_counts(&r, &h))
}

/// Whitespace tokenization; transcripts are expected to be normalized already.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionAccuracy {
    pub per_dataset: BTreeMap<String, f64>,
    pub a_avg: f64,
}

/// Unweighted mean over datasets of the per-dataset accuracy.
///
/// Each item is `(dataset_id, prediction_correct)`.
pub fn average_per_dataset_accuracy<'a, I>(outcomes: I) -> SelectionAccuracy
where
    I: IntoIterator<Item = (&'a str, bool)>,
{
    let mut tallies: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (dataset, correct) in outcomes {
        let t = tallies.entry(dataset).or_default();
        t.0 += usize::from(correct);
        t.1 += 1;
    }
    let per_dataset: BTreeMap<String, f64> = tallies
        .into_iter()
        .map(|(d, (c, n))| (d.to_string(), c as f64 / n as f64))
        .collect();
    let a_avg = if per_dataset.is_empty() {
        0.0
    } else {
        per_dataset.values().sum::<f64>() / per_dataset.len() as f64
    };
    SelectionAccuracy { per_dataset, a_avg }
}

/// A_avg of `predictions` (utterance id -> model index) over one split.
pub fn a_avg(
    predictions: &BTreeMap<String, usize>,
    corpus: &Corpus,
    split: Split,
) -> Result<SelectionAccuracy> {
    let utterances = corpus.utterances(split);
    if utterances.is_empty() {
        return Err(Error::validation(format!("split `{}` is empty", split.as_str())));
    }
    let mut outcomes = Vec::with_capacity(utterances.len());
    for u in &utterances {
        let pred = predictions.get(&u.record.utterance_id).ok_or_else(|| {
            Error::record(&u.record.utterance_id, "no model-selection prediction")
        })?;
        outcomes.push((u.dataset_id, *pred == u.label));
    }
    Ok(average_per_dataset_accuracy(outcomes))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub utterances: usize,
    pub reference_words: usize,
    /// Utterances left out of WER because they have no reference.
    pub skipped_without_reference: usize,
}

/// Pooled WER counts: system -> dataset -> counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WerTable {
    pub counts: BTreeMap<String, BTreeMap<String, WerCounts>>,
    pub datasets: BTreeMap<String, DatasetCounts>,
}

impl WerTable {
    pub fn wer(&self, system: &str, dataset: &str) -> Option<f64> {
        self.counts.get(system)?.get(dataset).map(WerCounts::wer)
    }

    pub fn rates(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        self.counts
            .iter()
            .map(|(s, per)| (s.clone(), per.iter().map(|(d, c)| (d.clone(), c.wer())).collect()))
            .collect()
    }
}

/// WER of each model, of the ensemble under `predictions`, and of the oracle
/// (the designated correct model), pooled per dataset as errors over words.
pub fn ensemble_wer(
    corpus: &Corpus,
    split: Split,
    predictions: &BTreeMap<String, usize>,
) -> Result<WerTable> {
    let models = corpus.models();
    let mut table = WerTable::default();
    for u in corpus.utterances(split) {
        let r = u.record;
        let entry = table.datasets.entry(u.dataset_id.to_string()).or_default();
        entry.utterances += 1;
        if !r.has_reference() {
            entry.skipped_without_reference += 1;
            continue;
        }
        entry.reference_words += r.reference_words.len();
        let pred = *predictions
            .get(&r.utterance_id)
            .ok_or_else(|| Error::record(&r.utterance_id, "no model-selection prediction"))?;
        let mut per_model = Vec::with_capacity(models.len());
        for m in models {
            let hyp = r
                .hypotheses
                .get(m)
                .ok_or_else(|| Error::record(&r.utterance_id, format!("no hypothesis from `{m}`")))?;
            per_model.push(wer(&r.reference_words, &hyp.hypothesis_words)?);
        }
        let mut add = |system: &str, c: WerCounts| {
            *table
                .counts
                .entry(system.to_string())
                .or_default()
                .entry(u.dataset_id.to_string())
                .or_default() += c;
        };
        for (m, c) in models.iter().zip(&per_model) {
            add(m, *c);
        }
        add(ENSEMBLE_SYSTEM, per_model[pred]);
        add(ORACLE_SYSTEM, per_model[u.label]);
    }
    let skipped: usize = table.datasets.values().map(|d| d.skipped_without_reference).sum();
    if skipped > 0 {
        log::warn!("{skipped} utterance(s) without reference excluded from WER");
    }
    Ok(table)
}

/// Everything measured for one selector on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub split: Split,
    pub per_dataset_accuracy: BTreeMap<String, f64>,
    pub a_avg: f64,
    /// system -> dataset -> pooled WER
    pub wer: BTreeMap<String, BTreeMap<String, f64>>,
    pub counts: BTreeMap<String, DatasetCounts>,
    /// Model ids in manifest order, for table rendering.
    pub models: Vec<String>,
}

impl EvaluationReport {
    pub fn build(corpus: &Corpus, split: Split, predictions: &BTreeMap<String, usize>) -> Result<Self> {
        let acc = a_avg(predictions, corpus, split)?;
        let table = ensemble_wer(corpus, split, predictions)?;
        Ok(EvaluationReport {
            split,
            per_dataset_accuracy: acc.per_dataset,
            a_avg: acc.a_avg,
            wer: table.rates(),
            counts: table.datasets,
            models: corpus.models().to_vec(),
        })
    }

    /// Systems in display order: models, then ensemble and oracle.
    pub fn systems(&self) -> Vec<String> {
        let mut out = self.models.clone();
        out.push(ENSEMBLE_SYSTEM.to_string());
        out.push(ORACLE_SYSTEM.to_string());
        out
    }

    /// Systems x datasets WER grid, plus a selection-accuracy row carrying A_avg.
    pub fn to_csv(&self) -> Result<String> {
        let datasets: Vec<&String> = self.per_dataset_accuracy.keys().collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["system".to_string()];
        header.extend(datasets.iter().map(|d| d.to_string()));
        header.push("a_avg".into());
        w.write_record(&header)?;
        for system in self.systems() {
            let mut row = vec![format!("wer:{system}")];
            for d in &datasets {
                row.push(
                    self.wer
                        .get(&system)
                        .and_then(|m| m.get(*d))
                        .map(|v| format!("{v}"))
                        .unwrap_or_default(),
                );
            }
            row.push(String::new());
            w.write_record(&row)?;
        }
        let mut row = vec!["selection_accuracy".to_string()];
        row.extend(datasets.iter().map(|d| format!("{}", self.per_dataset_accuracy[*d])));
        row.push(format!("{}", self.a_avg));
        w.write_record(&row)?;
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}
