//! Entropy-based confidence of a probability stream.
//!
//! A step confidence maps one output distribution to `[0, 1]`: `1` for a
//! one-hot distribution, `0` for the uniform one (except `max_prob`, which
//! gives `1/V` there). Step confidences are then aggregated over the stream.
//!
//! Entropies, for a distribution `p` over `V` tokens and order `alpha`:
//!
//! | measure | entropy `H` | maximum `H_max` |
//! |---------|-------------|-----------------|
//! | gibbs   | `-sum p ln p` | `ln V` |
//! | tsallis | `(1 - sum p^alpha) / (alpha - 1)` | `(1 - V^(1-alpha)) / (alpha - 1)` |
//! | renyi   | `ln(sum p^alpha) / (1 - alpha)` | `ln V` |
//!
//! At `alpha = 1` Tsallis and Renyi take their Gibbs limit. Normalizations:
//! linear `1 - H / H_max`; exponential
//! `(e^-H - e^-H_max) / (1 - e^-H_max)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probstream::{Corpus, LabeledUtterance, ProbabilityStream, Split, StreamKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    MaxProb,
    Gibbs,
    Tsallis,
    Renyi,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::MaxProb, Measure::Gibbs, Measure::Tsallis, Measure::Renyi];

    pub fn is_entropy(self) -> bool {
        self != Measure::MaxProb
    }

    /// Whether `alpha` changes the value of this measure.
    pub fn uses_alpha(self) -> bool {
        matches!(self, Measure::Tsallis | Measure::Renyi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Linear,
    Exponential,
}

impl Normalization {
    pub const ALL: [Normalization; 2] = [Normalization::Linear, Normalization::Exponential];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Min,
    Max,
    Mean,
    Product,
}

impl Aggregation {
    pub const ALL: [Aggregation; 4] = [
        Aggregation::Min,
        Aggregation::Max,
        Aggregation::Mean,
        Aggregation::Product,
    ];
}

/// How one confidence scalar is computed from a stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceConfig {
    pub measure: Measure,
    /// Ignored for `max_prob`.
    pub normalization: Normalization,
    pub aggregation: Aggregation,
    pub exclude_blanks: bool,
    pub temperature: f64,
    /// Entropy order; only Tsallis and Renyi read it.
    pub alpha: f64,
}

pub const PRESET_UNTUNED_MAX_PROB: &str = "untuned-max-prob";
pub const PRESET_DEFAULT: &str = "default";

impl ConfidenceConfig {
    /// Product of the per-step maximum probabilities, blanks included.
    pub fn untuned_max_prob() -> Self {
        ConfidenceConfig {
            measure: Measure::MaxProb,
            normalization: Normalization::Linear,
            aggregation: Aggregation::Product,
            exclude_blanks: false,
            temperature: 1.0,
            alpha: 1.0,
        }
    }

    /// Renyi entropy, linear normalization, mean over non-blank steps, T = 1, alpha = 0.25.
    pub fn default_preset() -> Self {
        ConfidenceConfig {
            measure: Measure::Renyi,
            normalization: Normalization::Linear,
            aggregation: Aggregation::Mean,
            exclude_blanks: true,
            temperature: 1.0,
            alpha: 0.25,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            PRESET_UNTUNED_MAX_PROB => Ok(Self::untuned_max_prob()),
            PRESET_DEFAULT => Ok(Self::default_preset()),
            other => Err(Error::validation(format!(
                "unknown confidence preset `{other}` (known: {PRESET_UNTUNED_MAX_PROB}, {PRESET_DEFAULT})"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::validation(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::validation(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Pins the fields `max_prob` ignores to fixed sentinels (linear, alpha = 1).
    pub fn canonical(mut self) -> Self {
        if self.measure == Measure::MaxProb {
            self.normalization = Normalization::Linear;
            self.alpha = 1.0;
        }
        self
    }

    /// Parses either a preset name (bare or JSON string) or a flat JSON object.
    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum ConfigOrPreset {
            Preset(String),
            Config(ConfidenceConfig),
        }
        let trimmed = text.trim();
        if !trimmed.starts_with('{') && !trimmed.starts_with('"') {
            return Self::preset(trimmed);
        }
        let cfg = match serde_json::from_str::<ConfigOrPreset>(trimmed)
            .map_err(|e| Error::json("confidence config", e))?
        {
            ConfigOrPreset::Preset(name) => Self::preset(&name)?,
            ConfigOrPreset::Config(cfg) => cfg,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for ConfidenceConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_json_str(s)
    }
}

impl fmt::Display for ConfidenceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let measure = serde_json::to_value(self.measure).unwrap_or_default();
        let norm = serde_json::to_value(self.normalization).unwrap_or_default();
        let agg = serde_json::to_value(self.aggregation).unwrap_or_default();
        write!(
            f,
            "{}/{}/{}/{}/T={}/a={}",
            measure.as_str().unwrap_or("?"),
            norm.as_str().unwrap_or("?"),
            agg.as_str().unwrap_or("?"),
            if self.exclude_blanks { "no-blanks" } else { "with-blanks" },
            self.temperature,
            self.alpha
        )
    }
}

/// Temperature-scaled distribution of one step.
///
/// Logits go through `softmax(z / T)`; probabilities are sharpened as
/// `q^(1/T)` and renormalized.
pub fn step_distribution(values: &[f64], kind: StreamKind, temperature: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    step_distribution_into(values, kind, temperature, &mut out)?;
    Ok(out)
}

pub(crate) fn step_distribution_into(
    values: &[f64],
    kind: StreamKind,
    temperature: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    let inv_t = 1.0 / temperature;
    match kind {
        StreamKind::Logits => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(Error::DegenerateStep("all logits are -inf".into()));
            }
            out.extend(values.iter().map(|&z| ((z - max) * inv_t).exp()));
        }
        StreamKind::Probabilities => {
            if temperature == 1.0 {
                out.extend_from_slice(values);
            } else {
                let max = values.iter().copied().fold(0.0, f64::max);
                if max <= 0.0 {
                    return Err(Error::DegenerateStep("all probabilities are zero".into()));
                }
                let ln_max = max.ln();
                out.extend(values.iter().map(|&q| {
                    if q > 0.0 {
                        ((q.ln() - ln_max) * inv_t).exp()
                    } else {
                        0.0
                    }
                }));
            }
        }
    }
    let sum: f64 = out.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::DegenerateStep(format!("distribution sums to {sum}")));
    }
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|p| *p *= inv);
    Ok(())
}

/// Entropy of `p` given its elementwise logs (`-inf` where `p = 0`).
pub(crate) fn entropy_with_logs(p: &[f64], ln_p: &[f64], measure: Measure, alpha: f64) -> f64 {
    let gibbs = || -> f64 {
        -p.iter()
            .zip(ln_p)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &l)| pi * l)
            .sum::<f64>()
    };
    // sum p (p^(alpha-1) - 1) = sum p^alpha - 1, without the cancellation near alpha = 1
    let power_excess = || -> f64 {
        let beta = alpha - 1.0;
        p.iter()
            .zip(ln_p)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &l)| pi * (beta * l).exp_m1())
            .sum::<f64>()
    };
    match measure {
        Measure::MaxProb => f64::NAN,
        Measure::Gibbs => gibbs(),
        Measure::Tsallis if alpha == 1.0 => gibbs(),
        Measure::Renyi if alpha == 1.0 => gibbs(),
        Measure::Tsallis => -power_excess() / (alpha - 1.0),
        Measure::Renyi => power_excess().ln_1p() / (1.0 - alpha),
    }
}

/// Entropy of a distribution. `NaN` for `max_prob`, which has none.
pub fn entropy(p: &[f64], measure: Measure, alpha: f64) -> f64 {
    let ln_p: Vec<f64> = p.iter().map(|&x| x.ln()).collect();
    entropy_with_logs(p, &ln_p, measure, alpha)
}

/// Entropy of the uniform distribution over `vocab_size` tokens.
pub fn max_entropy(vocab_size: usize, measure: Measure, alpha: f64) -> f64 {
    let ln_v = (vocab_size as f64).ln();
    match measure {
        Measure::MaxProb => f64::NAN,
        Measure::Tsallis if alpha != 1.0 => -((1.0 - alpha) * ln_v).exp_m1() / (alpha - 1.0),
        _ => ln_v,
    }
}

/// Maps an entropy in `[0, h_max]` to a confidence in `[0, 1]`.
pub fn normalize_entropy(h: f64, h_max: f64, normalization: Normalization) -> f64 {
    if h_max <= 0.0 {
        return 1.0;
    }
    let c = match normalization {
        Normalization::Linear => 1.0 - h / h_max,
        Normalization::Exponential => {
            let floor = (-h_max).exp();
            ((-h).exp() - floor) / (1.0 - floor)
        }
    };
    c.clamp(0.0, 1.0)
}

/// Confidence of one step distribution.
pub fn step_confidence(p: &[f64], cfg: &ConfidenceConfig) -> f64 {
    match cfg.measure {
        Measure::MaxProb => p.iter().copied().fold(0.0, f64::max).clamp(0.0, 1.0),
        measure => {
            let h = entropy(p, measure, cfg.alpha);
            normalize_entropy(h, max_entropy(p.len(), measure, cfg.alpha), cfg.normalization)
        }
    }
}

/// Reduces step confidences to one value. Product runs in log space.
pub fn aggregate<I>(values: I, aggregation: Aggregation) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut n = 0usize;
    let mut acc = match aggregation {
        Aggregation::Min => f64::INFINITY,
        Aggregation::Max => f64::NEG_INFINITY,
        Aggregation::Mean | Aggregation::Product => 0.0,
    };
    for v in values {
        n += 1;
        match aggregation {
            Aggregation::Min => acc = acc.min(v),
            Aggregation::Max => acc = acc.max(v),
            Aggregation::Mean => acc += v,
            Aggregation::Product => acc += v.ln(),
        }
    }
    if n == 0 {
        return f64::NAN;
    }
    let out = match aggregation {
        Aggregation::Mean => acc / n as f64,
        Aggregation::Product => acc.exp(),
        _ => acc,
    };
    out.clamp(0.0, 1.0)
}

/// Aggregates precomputed step confidences, dropping blank steps when asked.
///
/// If every step is blank the full step set is used instead.
pub(crate) fn aggregate_steps(
    step_conf: &[f64],
    blank: &[bool],
    aggregation: Aggregation,
    exclude_blanks: bool,
) -> f64 {
    if exclude_blanks && blank.iter().any(|b| !b) {
        aggregate(
            step_conf
                .iter()
                .zip(blank)
                .filter(|(_, &b)| !b)
                .map(|(&c, _)| c),
            aggregation,
        )
    } else {
        aggregate(step_conf.iter().copied(), aggregation)
    }
}

/// Confidence of a whole stream under `cfg`.
pub fn stream_confidence(stream: &ProbabilityStream, cfg: &ConfidenceConfig) -> Result<f64> {
    let mut p = Vec::with_capacity(stream.vocab_size);
    let mut conf = Vec::with_capacity(stream.steps.len());
    let mut blank = Vec::with_capacity(stream.steps.len());
    for step in &stream.steps {
        step_distribution_into(&step.values, stream.kind, cfg.temperature, &mut p)?;
        conf.push(step_confidence(&p, cfg));
        blank.push(stream.is_blank(step));
    }
    if cfg.exclude_blanks && blank.iter().all(|&b| b) {
        log::debug!(
            "utterance `{}` model `{}`: all steps blank, aggregating over all steps",
            stream.utterance_id,
            stream.model_id
        );
    }
    Ok(aggregate_steps(&conf, &blank, cfg.aggregation, cfg.exclude_blanks))
}

/// Confidence vector `[c_1, .., c_M]` (manifest model order) for each utterance.
pub fn confidence_vectors(
    utterances: &[LabeledUtterance<'_>],
    models: &[String],
    cfg: &ConfidenceConfig,
    layer_id: u32,
) -> Result<BTreeMap<String, Vec<f64>>> {
    cfg.validate()?;
    let mut out = BTreeMap::new();
    for u in utterances {
        let row = models
            .iter()
            .map(|m| {
                let stream = u.record.select_layer(m, layer_id).map_err(|e| {
                    Error::record(&u.record.utterance_id, format!("model `{m}`: {e}"))
                })?;
                stream_confidence(stream, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(u.record.utterance_id.clone(), row);
    }
    Ok(out)
}

/// Confidence vectors for every utterance of the given splits.
pub fn confidence_matrix(
    corpus: &Corpus,
    splits: &[Split],
    cfg: &ConfidenceConfig,
    layer_id: u32,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let utterances: Vec<_> = splits.iter().flat_map(|&s| corpus.utterances(s)).collect();
    confidence_vectors(&utterances, corpus.models(), cfg, layer_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probstream::Step;
    use approx::assert_abs_diff_eq;

    fn cfg(measure: Measure, normalization: Normalization, alpha: f64) -> ConfidenceConfig {
        ConfidenceConfig {
            measure,
            normalization,
            aggregation: Aggregation::Mean,
            exclude_blanks: false,
            temperature: 1.0,
            alpha,
        }
    }

    #[test]
    fn uniform_logits_give_uniform_distribution() {
        for t in [0.01, 1.0, 10.0] {
            let p = step_distribution(&[0.0; 4], StreamKind::Logits, t).unwrap();
            for x in p {
                assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_identity_at_unit_temperature() {
        let p = step_distribution(&[0.5, 0.5], StreamKind::Probabilities, 1.0).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn temperature_scaled_softmax() {
        // exp(4) / (1 + exp(4)), 40-digit reference
        let p = step_distribution(&[2.0, 0.0], StreamKind::Logits, 0.5).unwrap();
        assert_abs_diff_eq!(p[0], 0.982_013_790_037_908_4, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0 - 0.982_013_790_037_908_4, epsilon = 1e-15);
    }

    #[test]
    fn probability_temperature_sharpens() {
        let p = step_distribution(&[0.6, 0.4, 0.0], StreamKind::Probabilities, 0.5).unwrap();
        assert_abs_diff_eq!(p[0], 0.36 / 0.52, epsilon = 1e-12);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn degenerate_steps_error() {
        assert!(matches!(
            step_distribution(&[f64::NEG_INFINITY; 3], StreamKind::Logits, 1.0),
            Err(Error::DegenerateStep(_))
        ));
        assert!(matches!(
            step_distribution(&[0.0; 3], StreamKind::Probabilities, 1.0),
            Err(Error::DegenerateStep(_))
        ));
        assert!(step_distribution(&[0.0; 3], StreamKind::Probabilities, 2.0).is_err());
    }

    #[test]
    fn uniform_is_zero_and_one_hot_is_one() {
        for measure in [Measure::Gibbs, Measure::Tsallis, Measure::Renyi] {
            for norm in Normalization::ALL {
                for alpha in [0.1, 0.25, 0.5, 1.0, 2.0] {
                    let c = cfg(measure, norm, alpha);
                    assert_abs_diff_eq!(step_confidence(&[0.25; 4], &c), 0.0, epsilon = 1e-12);
                    assert_eq!(step_confidence(&[0.0, 1.0, 0.0, 0.0], &c), 1.0);
                }
            }
        }
        let mp = cfg(Measure::MaxProb, Normalization::Linear, 1.0);
        assert_eq!(step_confidence(&[0.25; 4], &mp), 0.25);
        assert_eq!(step_confidence(&[0.0, 1.0, 0.0, 0.0], &mp), 1.0);
    }

    #[test]
    fn renyi_linear_reference_value() {
        // 1 - ln(sum p^0.25) / (0.75 ln 4), 40-digit reference
        let c = step_confidence(
            &[0.7, 0.1, 0.1, 0.1],
            &cfg(Measure::Renyi, Normalization::Linear, 0.25),
        );
        assert_abs_diff_eq!(c, 0.080_357_972_398_104_23, epsilon = 1e-12);
    }

    #[test]
    fn aggregations() {
        assert_abs_diff_eq!(aggregate([0.2, 0.4, 0.9], Aggregation::Mean), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(aggregate([0.5, 0.5], Aggregation::Product), 0.25, epsilon = 1e-15);
        assert_eq!(aggregate([0.2, 0.4, 0.9], Aggregation::Min), 0.2);
        assert_eq!(aggregate([0.2, 0.4, 0.9], Aggregation::Max), 0.9);
        assert_eq!(aggregate([0.3, 0.0], Aggregation::Product), 0.0);
    }

    fn prob_stream(rows: &[(&[f64], usize)]) -> ProbabilityStream {
        ProbabilityStream {
            utterance_id: "u".into(),
            model_id: "m".into(),
            layer_id: 0,
            frame_rate_hz: 10.0,
            vocab_size: rows[0].0.len(),
            blank_index: 0,
            kind: StreamKind::Probabilities,
            steps: rows
                .iter()
                .map(|(v, t)| Step {
                    values: v.to_vec(),
                    emitted_token: *t,
                })
                .collect(),
        }
    }

    #[test]
    fn untuned_max_prob_is_product_of_emitted_probabilities() {
        let s = prob_stream(&[
            (&[0.1, 0.9, 0.0], 1),
            (&[1.0, 0.0, 0.0], 0),
            (&[0.0, 0.2, 0.8], 2),
        ]);
        let c = stream_confidence(&s, &ConfidenceConfig::untuned_max_prob()).unwrap();
        assert_abs_diff_eq!(c, 0.72, epsilon = 1e-12);
    }

    #[test]
    fn blank_filtering_and_fallback() {
        let s = prob_stream(&[(&[1.0, 0.0], 0), (&[0.4, 0.6], 1)]);
        let mut c = ConfidenceConfig::untuned_max_prob();
        c.aggregation = Aggregation::Mean;
        assert_abs_diff_eq!(stream_confidence(&s, &c).unwrap(), 0.8, epsilon = 1e-12);
        c.exclude_blanks = true;
        assert_abs_diff_eq!(stream_confidence(&s, &c).unwrap(), 0.6, epsilon = 1e-12);

        let all_blank = prob_stream(&[(&[1.0, 0.0], 0), (&[0.6, 0.4], 0)]);
        assert_abs_diff_eq!(stream_confidence(&all_blank, &c).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn presets_and_parsing() {
        let d = ConfidenceConfig::default_preset();
        assert_eq!(d.measure, Measure::Renyi);
        assert_eq!(d.alpha, 0.25);
        assert!(d.exclude_blanks);
        assert_eq!(ConfidenceConfig::from_json_str("default").unwrap(), d);
        assert_eq!(ConfidenceConfig::from_json_str("\"untuned-max-prob\"").unwrap(), ConfidenceConfig::untuned_max_prob());
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(ConfidenceConfig::from_json_str(&text).unwrap(), d);
        assert!(ConfidenceConfig::from_json_str("bogus").is_err());
        assert!(ConfidenceConfig::from_json_str(
            r#"{"measure":"gibbs","normalization":"linear","aggregation":"mean","exclude_blanks":false,"temperature":0.0,"alpha":1.0}"#
        )
        .is_err());
    }

    #[test]
    fn tsallis_max_entropy_matches_uniform() {
        for alpha in [0.1, 0.33, 2.0] {
            let u = vec![1.0 / 7.0; 7];
            assert_abs_diff_eq!(
                entropy(&u, Measure::Tsallis, alpha),
                max_entropy(7, Measure::Tsallis, alpha),
                epsilon = 1e-12
            );
        }
    }
}
