//! Confidence-based ensembles of sequence recognizers.
//!
//! Several recognizers run on the same input. Each one's per-step output
//! distributions are reduced to a scalar confidence, and a multinomial
//! logistic-regression selector picks the model whose output is kept.
//!
//! - [`probstream`]: the data model (probability streams, utterances, corpora) and its files.
//! - [`confidence`]: max-probability and Gibbs/Tsallis/Rényi entropy confidences.
//! - [`selector`]: the logistic-regression selector and its decision threshold.
//! - [`tuning`]: grid search over confidence configs and selector hyperparameters.
//! - [`metrics`]: average per-dataset selection accuracy and WER.
//! - [`simulator`]: seeded synthetic corpora for experiments and tests.
//! - [`pipeline`]: the stages behind the `confens` binary, each writing a run directory.

pub mod confidence;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod probstream;
mod rng;
pub mod selector;
pub mod simulator;
pub mod tuning;

pub use confidence::{Aggregation, ConfidenceConfig, Measure, Normalization};
pub use error::{Error, Result};
pub use metrics::EvaluationReport;
pub use probstream::{Corpus, CorpusManifest, ProbabilityStream, Split, UtteranceRecord};
pub use selector::{FeatureLayout, FeatureVector, SelectorModel, Threshold, TrainParams};
pub use simulator::{simulate, stress_preset, SimSpec};
pub use tuning::{grid_search, LrGrid, SearchSpace, TuningResult};
