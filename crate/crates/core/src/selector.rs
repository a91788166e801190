//! Model selection block: multinomial logistic regression from per-utterance
//! feature vectors (model confidences, optionally followed by auxiliary
//! classifier posteriors) to the index of the model whose output is kept.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::confidence::ConfidenceConfig;
use crate::error::{Error, Result};
use crate::probstream::LabeledUtterance;

pub const SELECTOR_FORMAT_VERSION: u32 = 1;

/// Bias held by classes that have no training examples.
const ABSENT_CLASS_BIAS: f64 = -50.0;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub utterance_id: String,
    pub values: Vec<f64>,
    /// Index of the correct model, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_label: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxTransform {
    #[default]
    Raw,
    /// `ln(max(x, 1e-12))`
    Log,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSource {
    pub source_id: String,
    pub dim: usize,
}

/// Column layout of a feature vector: confidences of `models` (in order)
/// taken from `layer_id`, then each auxiliary source's scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub models: Vec<String>,
    pub layer_id: u32,
    #[serde(default)]
    pub aux_sources: Vec<AuxSource>,
    #[serde(default)]
    pub aux_transform: AuxTransform,
}

impl FeatureLayout {
    pub fn confidences(models: &[String], layer_id: u32) -> Self {
        FeatureLayout {
            models: models.to_vec(),
            layer_id,
            aux_sources: Vec::new(),
            aux_transform: AuxTransform::Raw,
        }
    }

    pub fn with_aux(mut self, source_id: &str, dim: usize) -> Self {
        self.aux_sources.push(AuxSource {
            source_id: source_id.to_string(),
            dim,
        });
        self
    }

    pub fn dim(&self) -> usize {
        self.models.len() + self.aux_sources.iter().map(|a| a.dim).sum::<usize>()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.models.iter().map(|m| format!("conf:{m}")).collect();
        for a in &self.aux_sources {
            names.extend((0..a.dim).map(|i| format!("{}:{i}", a.source_id)));
        }
        names
    }
}

/// Builds feature vectors `[c_1..c_M, aux..]` in `utterances` order.
///
/// `confidences` rows must follow `layout.models`; they may be absent when the
/// layout has no confidence columns.
pub fn assemble_features(
    confidences: &BTreeMap<String, Vec<f64>>,
    utterances: &[LabeledUtterance<'_>],
    layout: &FeatureLayout,
) -> Result<Vec<FeatureVector>> {
    utterances
        .iter()
        .map(|u| {
            let id = &u.record.utterance_id;
            let mut values = Vec::with_capacity(layout.dim());
            if !layout.models.is_empty() {
                let row = confidences
                    .get(id)
                    .ok_or_else(|| Error::record(id, "no confidence vector"))?;
                if row.len() != layout.models.len() {
                    return Err(Error::record(
                        id,
                        format!(
                            "confidence vector has {} entries, layout expects {}",
                            row.len(),
                            layout.models.len()
                        ),
                    ));
                }
                values.extend_from_slice(row);
            }
            for source in &layout.aux_sources {
                let scores = u
                    .record
                    .aux_scores
                    .as_ref()
                    .and_then(|a| a.get(&source.source_id))
                    .ok_or_else(|| {
                        Error::record(id, format!("missing aux scores `{}`", source.source_id))
                    })?;
                if scores.len() != source.dim {
                    return Err(Error::record(
                        id,
                        format!(
                            "aux scores `{}` have length {}, layout expects {}",
                            source.source_id,
                            scores.len(),
                            source.dim
                        ),
                    ));
                }
                match layout.aux_transform {
                    AuxTransform::Raw => values.extend_from_slice(scores),
                    AuxTransform::Log => values.extend(scores.iter().map(|&s| s.max(LOG_FLOOR).ln())),
                }
            }
            Ok(FeatureVector {
                utterance_id: id.clone(),
                values,
                true_label: Some(u.label),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    Uniform,
    /// `w_k = n / (K * n_k)` over the classes present in training.
    Balanced,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub l2_lambda: f64,
    pub class_weighting: ClassWeighting,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub gradient_tolerance: f64,
}

fn default_max_iterations() -> usize {
    5000
}

fn default_tolerance() -> f64 {
    1e-7
}

impl TrainParams {
    pub fn new(l2_lambda: f64, class_weighting: ClassWeighting) -> Self {
        TrainParams {
            l2_lambda,
            class_weighting,
            max_iterations: default_max_iterations(),
            gradient_tolerance: default_tolerance(),
        }
    }
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams::new(0.01, ClassWeighting::Uniform)
    }
}

/// Decision rule applied on top of the fitted posteriors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Plain argmax, ties to the lowest index.
    #[default]
    Neutral,
    /// Two classes only: pick the second class iff its posterior is `>= theta`.
    Binary(f64),
    /// Additive per-class logit offsets.
    Offsets(Vec<f64>),
}

impl Threshold {
    /// The per-class offsets equivalent to this rule, for `n_classes` classes.
    ///
    /// A binary threshold `theta` becomes `-ln(theta / (1 - theta))` on the
    /// second class.
    pub fn offsets(&self, n_classes: usize) -> Vec<f64> {
        match self {
            Threshold::Neutral => vec![0.0; n_classes],
            Threshold::Binary(theta) => vec![0.0, -(theta / (1.0 - theta)).ln()],
            Threshold::Offsets(o) => o.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub gradient_inf_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel {
    pub version: u32,
    /// Feature layout the model was trained on; set by the pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<FeatureLayout>,
    /// Confidence measure used for the confidence columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<ConfidenceConfig>,
    pub n_classes: usize,
    /// `n_classes` rows of `feature_dim` weights, on standardized features.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// `false` for zero-variance features whose weights are pinned to zero.
    pub active_features: Vec<bool>,
    pub l2_lambda: f64,
    pub class_weights: Vec<f64>,
    pub threshold: Threshold,
    pub fit: FitSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub index: usize,
    pub posterior: Vec<f64>,
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl SelectorModel {
    pub fn feature_dim(&self) -> usize {
        self.feature_means.len()
    }

    /// Raw class scores `W x_std + b`, before thresholding.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim() {
            return Err(Error::Dimension {
                expected: self.feature_dim(),
                actual: x.len(),
            });
        }
        let xs: Vec<f64> = x
            .iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect();
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| b + row.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>())
            .collect())
    }

    /// Posterior before any threshold offsets.
    pub fn raw_posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.logits(x)?;
        softmax_in_place(&mut z);
        Ok(z)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let mut z = self.logits(x)?;
        match &self.threshold {
            Threshold::Neutral => {
                softmax_in_place(&mut z);
                Ok(Prediction {
                    index: argmax_lowest(&z),
                    posterior: z,
                })
            }
            Threshold::Binary(theta) => {
                softmax_in_place(&mut z);
                let index = usize::from(z[1] >= *theta);
                Ok(Prediction { index, posterior: z })
            }
            Threshold::Offsets(offsets) => {
                z.iter_mut().zip(offsets).for_each(|(v, o)| *v += o);
                softmax_in_place(&mut z);
                Ok(Prediction {
                    index: argmax_lowest(&z),
                    posterior: z,
                })
            }
        }
    }

    /// Predictions keyed by utterance id.
    pub fn predict_all(&self, features: &[FeatureVector]) -> Result<BTreeMap<String, usize>> {
        features
            .iter()
            .map(|f| Ok((f.utterance_id.clone(), self.predict(&f.values)?.index)))
            .collect()
    }

    pub fn with_threshold(&self, threshold: Threshold) -> Result<SelectorModel> {
        match &threshold {
            Threshold::Binary(theta) => {
                if self.n_classes != 2 {
                    return Err(Error::validation("binary threshold needs a two-class selector"));
                }
                if !(0.0..=1.0).contains(theta) {
                    return Err(Error::validation(format!("threshold {theta} outside [0, 1]")));
                }
            }
            Threshold::Offsets(o) if o.len() != self.n_classes => {
                return Err(Error::Dimension {
                    expected: self.n_classes,
                    actual: o.len(),
                })
            }
            _ => {}
        }
        let mut out = self.clone();
        out.threshold = threshold;
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("selector", e))
    }

    pub fn from_json(text: &str) -> Result<SelectorModel> {
        let model: SelectorModel =
            serde_json::from_str(text).map_err(|e| Error::json("selector", e))?;
        if model.version != SELECTOR_FORMAT_VERSION {
            return Err(Error::validation(format!(
                "unsupported selector version {} (expected {SELECTOR_FORMAT_VERSION})",
                model.version
            )));
        }
        let f = model.feature_dim();
        let k = model.n_classes;
        if model.weights.len() != k
            || model.weights.iter().any(|r| r.len() != f)
            || model.bias.len() != k
            || model.feature_stds.len() != f
            || model.active_features.len() != f
            || model.class_weights.len() != k
        {
            return Err(Error::validation("selector arrays have inconsistent shapes"));
        }
        Ok(model)
    }
}

/// Standardized, weighted training data and the regularized objective.
///
/// Parameters are laid out as the `K x F` weight matrix (row-major) followed
/// by the `K` biases.
#[derive(Debug, Clone)]
pub struct TrainingProblem {
    x: Vec<f64>,
    y: Vec<usize>,
    sample_weight: Vec<f64>,
    n: usize,
    k: usize,
    f: usize,
    l2_lambda: f64,
    means: Vec<f64>,
    stds: Vec<f64>,
    active_features: Vec<bool>,
    active_classes: Vec<bool>,
    class_weights: Vec<f64>,
}

impl TrainingProblem {
    pub fn new(train: &[FeatureVector], n_classes: usize, params: &TrainParams) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::validation("empty training set"));
        }
        if !(params.l2_lambda.is_finite() && params.l2_lambda >= 0.0) {
            return Err(Error::validation(format!(
                "l2_lambda must be non-negative, got {}",
                params.l2_lambda
            )));
        }
        let f = train[0].values.len();
        let n = train.len();
        let mut counts = vec![0usize; n_classes];
        for v in train {
            if v.values.len() != f {
                return Err(Error::record(
                    &v.utterance_id,
                    format!("feature length {} differs from {f}", v.values.len()),
                ));
            }
            if let Some(j) = v.values.iter().position(|x| !x.is_finite()) {
                return Err(Error::record(&v.utterance_id, format!("feature {j} is not finite")));
            }
            let label = v
                .true_label
                .ok_or_else(|| Error::record(&v.utterance_id, "training vector has no label"))?;
            if label >= n_classes {
                return Err(Error::record(
                    &v.utterance_id,
                    format!("label {label} out of range for {n_classes} classes"),
                ));
            }
            counts[label] += 1;
        }
        let present = counts.iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::validation(format!(
                "training data must contain at least 2 classes, found {present}"
            )));
        }
        let class_weights = match &params.class_weighting {
            ClassWeighting::Uniform => vec![1.0; n_classes],
            ClassWeighting::Balanced => counts
                .iter()
                .map(|&c| {
                    if c == 0 {
                        0.0
                    } else {
                        n as f64 / (present as f64 * c as f64)
                    }
                })
                .collect(),
            ClassWeighting::Explicit(w) => {
                if w.len() != n_classes {
                    return Err(Error::Dimension {
                        expected: n_classes,
                        actual: w.len(),
                    });
                }
                if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::validation("class weights must be finite and non-negative"));
                }
                w.clone()
            }
        };

        let mut means = vec![0.0; f];
        for v in train {
            for (m, x) in means.iter_mut().zip(&v.values) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut stds = vec![0.0; f];
        for v in train {
            for ((s, x), m) in stds.iter_mut().zip(&v.values).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        let mut active_features = vec![true; f];
        for (j, s) in stds.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            if !(*s > 1e-12 * means[j].abs().max(1.0)) {
                *s = 1.0;
                active_features[j] = false;
            }
        }
        let mut x = Vec::with_capacity(n * f);
        for v in train {
            x.extend(
                v.values
                    .iter()
                    .zip(means.iter().zip(&stds))
                    .map(|(&val, (&m, &s))| (val - m) / s),
            );
        }
        let y: Vec<usize> = train.iter().map(|v| v.true_label.unwrap()).collect();
        let sample_weight = y.iter().map(|&c| class_weights[c]).collect();
        Ok(TrainingProblem {
            x,
            y,
            sample_weight,
            n,
            k: n_classes,
            f,
            l2_lambda: params.l2_lambda,
            means,
            stds,
            active_features,
            active_classes: counts.iter().map(|&c| c > 0).collect(),
            class_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.k * self.f + self.k
    }

    /// Standardized training features, row-major `n x F`.
    pub fn standardized_features(&self) -> &[f64] {
        &self.x
    }

    pub fn active_features(&self) -> &[bool] {
        &self.active_features
    }

    fn initial_point(&self) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim()];
        for c in 0..self.k {
            if !self.active_classes[c] {
                theta[self.k * self.f + c] = ABSENT_CLASS_BIAS;
            }
        }
        theta
    }

    fn is_free(&self, idx: usize) -> bool {
        if idx < self.k * self.f {
            self.active_classes[idx / self.f] && self.active_features[idx % self.f]
        } else {
            self.active_classes[idx - self.k * self.f]
        }
    }

    /// Weighted mean cross-entropy plus `(lambda / 2) * ||W||^2`.
    pub fn objective(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, None)
    }

    /// Objective and its gradient (zero on pinned coordinates).
    pub fn objective_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim()];
        let value = self.evaluate(theta, Some(&mut grad));
        (value, grad)
    }

    fn evaluate(&self, theta: &[f64], mut grad: Option<&mut Vec<f64>>) -> f64 {
        let (k, f) = (self.k, self.f);
        let (w, b) = theta.split_at(k * f);
        let mut z = vec![0.0; k];
        let mut loss = 0.0;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let inv_n = 1.0 / self.n as f64;
        for i in 0..self.n {
            let xi = &self.x[i * f..(i + 1) * f];
            for c in 0..k {
                let row = &w[c * f..(c + 1) * f];
                z[c] = b[c] + row.iter().zip(xi).map(|(a, x)| a * x).sum::<f64>();
            }
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in z.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            let yi = self.y[i];
            let wi = self.sample_weight[i] * inv_n;
            // -log softmax_y = log(sum) - (z_y - max)
            loss += wi * (sum.ln() - z[yi].ln());
            if let Some(g) = grad.as_deref_mut() {
                for c in 0..k {
                    let p = z[c] / sum;
                    let r = wi * (p - if c == yi { 1.0 } else { 0.0 });
                    if r != 0.0 {
                        let gr = &mut g[c * f..(c + 1) * f];
                        gr.iter_mut().zip(xi).for_each(|(gv, x)| *gv += r * x);
                        g[k * f + c] += r;
                    }
                }
            }
        }
        let reg: f64 = w.iter().map(|v| v * v).sum::<f64>() * 0.5 * self.l2_lambda;
        if let Some(g) = grad {
            for (gv, wv) in g[..k * f].iter_mut().zip(w) {
                *gv += self.l2_lambda * wv;
            }
            for (idx, gv) in g.iter_mut().enumerate() {
                if !self.is_free(idx) {
                    *gv = 0.0;
                }
            }
        }
        loss + reg
    }
}

/// Objective values at the accepted iterates of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub objective: Vec<f64>,
}

/// Fits the selector; see [`train_selector_traced`].
pub fn train_selector(
    train: &[FeatureVector],
    n_classes: usize,
    params: &TrainParams,
) -> Result<SelectorModel> {
    train_selector_traced(train, n_classes, params).map(|(m, _)| m)
}

/// Full-batch gradient descent with Armijo backtracking.
///
/// Each iteration tries the Barzilai-Borwein step first and halves it until
/// the sufficient-decrease condition holds, so the objective never increases
/// between accepted iterates. Stops once the gradient infinity norm reaches
/// the tolerance or after `max_iterations`.
pub fn train_selector_traced(
    train: &[FeatureVector],
    n_classes: usize,
    params: &TrainParams,
) -> Result<(SelectorModel, FitTrace)> {
    let problem = TrainingProblem::new(train, n_classes, params)?;
    let mut theta = problem.initial_point();
    let (mut value, mut grad) = problem.objective_and_gradient(&theta);
    let mut trace = vec![value];
    let inf_norm = |g: &[f64]| g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= params.gradient_tolerance;
    let mut candidate = vec![0.0; theta.len()];

    while !converged && iterations < params.max_iterations {
        let g_sq: f64 = grad.iter().map(|v| v * v).sum();
        let mut trial_step = step;
        let accepted = loop {
            for ((c, t), g) in candidate.iter_mut().zip(&theta).zip(&grad) {
                *c = t - trial_step * g;
            }
            let trial = problem.objective(&candidate);
            if trial <= value - ARMIJO_C * trial_step * g_sq {
                break Some(trial);
            }
            trial_step *= 0.5;
            if trial_step < MIN_STEP {
                break None;
            }
        };
        let Some(new_value) = accepted else {
            log::debug!("line search stalled after {iterations} iterations");
            break;
        };
        let (_, new_grad) = problem.objective_and_gradient(&candidate);
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..theta.len() {
            let s = candidate[i] - theta[i];
            let y = new_grad[i] - grad[i];
            sy += s * y;
            ss += s * s;
        }
        step = if sy > 0.0 { ss / sy } else { trial_step * 2.0 };
        std::mem::swap(&mut theta, &mut candidate);
        value = new_value;
        grad = new_grad;
        trace.push(value);
        iterations += 1;
        converged = inf_norm(&grad) <= params.gradient_tolerance;
    }

    let (k, f) = (problem.k, problem.f);
    let weights = (0..k).map(|c| theta[c * f..(c + 1) * f].to_vec()).collect();
    let bias = theta[k * f..].to_vec();
    let model = SelectorModel {
        version: SELECTOR_FORMAT_VERSION,
        layout: None,
        confidence: None,
        n_classes: k,
        weights,
        bias,
        feature_means: problem.means.clone(),
        feature_stds: problem.stds.clone(),
        active_features: problem.active_features.clone(),
        l2_lambda: params.l2_lambda,
        class_weights: problem.class_weights.clone(),
        threshold: Threshold::Neutral,
        fit: FitSummary {
            iterations,
            converged,
            objective: value,
            gradient_inf_norm: inf_norm(&grad),
        },
    };
    Ok((model, FitTrace { objective: trace }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdObjective {
    FavorBase,
    FavorTarget,
    Balanced,
}

impl std::str::FromStr for ThresholdObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "favor-base" => Ok(ThresholdObjective::FavorBase),
            "favor-target" => Ok(ThresholdObjective::FavorTarget),
            "balanced" => Ok(ThresholdObjective::Balanced),
            other => Err(Error::validation(format!("unknown threshold objective `{other}`"))),
        }
    }
}

/// Allowed drop, in accuracy points, of the other domain when favoring one.
pub const THRESHOLD_SLACK: f64 = 0.05;

/// Per-domain routing accuracy of a two-class selector at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: ThetaRule,
    /// Fraction of class-1 (base) examples routed to class 1.
    pub base_accuracy: f64,
    /// Fraction of class-2 (target) examples routed to class 2.
    pub target_accuracy: f64,
}

/// A binary operating threshold; `None` is the neutral argmax rule.
pub type ThetaRule = Option<f64>;

struct BinarySweep {
    base: Vec<f64>,
    target: Vec<f64>,
}

impl BinarySweep {
    fn point(&self, theta: ThetaRule) -> OperatingPoint {
        // routed to class 2 iff post >= theta (or post > 0.5 under argmax)
        let below = |sorted: &[f64]| match theta {
            Some(t) => sorted.partition_point(|&p| p < t),
            None => sorted.partition_point(|&p| p <= 0.5),
        };
        let frac = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        OperatingPoint {
            threshold: theta,
            base_accuracy: frac(below(&self.base), self.base.len()),
            target_accuracy: frac(self.target.len() - below(&self.target), self.target.len()),
        }
    }
}

/// Operating point of `model` (binary) on labeled `validation` data at `theta`.
pub fn operating_point(
    model: &SelectorModel,
    validation: &[FeatureVector],
    theta: ThetaRule,
) -> Result<OperatingPoint> {
    Ok(binary_sweep(model, validation)?.point(theta))
}

fn binary_sweep(model: &SelectorModel, validation: &[FeatureVector]) -> Result<BinarySweep> {
    if model.n_classes != 2 {
        return Err(Error::validation(format!(
            "threshold tuning needs a binary selector, got {} classes",
            model.n_classes
        )));
    }
    let mut base = Vec::new();
    let mut target = Vec::new();
    for v in validation {
        let post = model.raw_posterior(&v.values)?[1];
        match v.true_label {
            Some(0) => base.push(post),
            Some(1) => target.push(post),
            _ => {
                return Err(Error::record(
                    &v.utterance_id,
                    "threshold tuning needs labels in {0, 1}",
                ))
            }
        }
    }
    base.sort_by(f64::total_cmp);
    target.sort_by(f64::total_cmp);
    Ok(BinarySweep { base, target })
}

/// Moves the binary decision threshold to favor one domain.
///
/// Candidates are the distinct validation posteriors of class 2 plus the
/// neutral rule. `FavorBase` maximizes base-domain accuracy while keeping
/// target-domain accuracy within [`THRESHOLD_SLACK`] of its neutral value;
/// `FavorTarget` is the mirror image; `Balanced` restores the neutral rule.
pub fn tune_threshold(
    model: &SelectorModel,
    validation: &[FeatureVector],
    objective: ThresholdObjective,
) -> Result<SelectorModel> {
    let sweep = binary_sweep(model, validation)?;
    if objective == ThresholdObjective::Balanced {
        return model.with_threshold(Threshold::Neutral);
    }
    let mut candidates: Vec<f64> = sweep.base.iter().chain(&sweep.target).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    if candidates.len() <= 1 {
        return Ok(model.clone());
    }
    let neutral = sweep.point(None);
    let key = |p: &OperatingPoint| -> (f64, f64) {
        match objective {
            ThresholdObjective::FavorBase => (p.base_accuracy, p.target_accuracy),
            _ => (p.target_accuracy, p.base_accuracy),
        }
    };
    let floor = key(&neutral).1 - THRESHOLD_SLACK;
    let mut best = neutral;
    for theta in candidates {
        let p = sweep.point(Some(theta));
        let (primary, secondary) = key(&p);
        if secondary < floor - 1e-12 {
            continue;
        }
        let (bp, bs) = key(&best);
        // prefer the primary domain, then the other, then the threshold nearest 0.5
        let dist = |t: ThetaRule| (t.unwrap_or(0.5) - 0.5).abs();
        let better = primary
            .total_cmp(&bp)
            .then(secondary.total_cmp(&bs))
            .then(dist(best.threshold).total_cmp(&dist(p.threshold)));
        if better.is_gt() {
            best = p;
        }
    }
    model.with_threshold(match best.threshold {
        Some(t) => Threshold::Binary(t),
        None => Threshold::Neutral,
    })
}
