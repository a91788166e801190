//! Trains the logistic-regression selector on 100 utterances per dataset and
//! compares the untuned max-probability baseline with the default confidence.
//!
//! ```text
//! cargo run --release --example train_selector
//! ```

use confens::metrics::ENSEMBLE_SYSTEM;
use confens::probstream::Split;
use confens::selector::{ClassWeighting, FeatureLayout, TrainParams};
use confens::simulator::stress_preset;
use confens::tuning::{evaluate_config, train_on_corpus};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    let corpus = confens::simulate(&stress_preset("overconfident")?)?;
    let layout = FeatureLayout::confidences(corpus.models(), 0);
    let params = TrainParams::new(0.01, ClassWeighting::Uniform);

    for (name, cfg) in [
        ("untuned max-prob", ConfidenceConfig::untuned_max_prob()),
        ("default", ConfidenceConfig::default_preset()),
    ] {
        let selector = train_on_corpus(&corpus, &cfg, &layout, 100, 42, &params)?;
        let report = evaluate_config(&corpus, &cfg, &selector, Split::Validation)?;
        println!(
            "{name:<17} A_avg {:.4}  ({} iterations, converged: {})",
            report.a_avg, selector.fit.iterations, selector.fit.converged
        );
        for (d, acc) in &report.per_dataset_accuracy {
            let wer = report.wer[ENSEMBLE_SYSTEM][d];
            println!("    {d}: accuracy {acc:.3}, ensemble WER {:.2}%", 100.0 * wer);
        }
    }

    let cfg = ConfidenceConfig::default_preset();
    let selector = train_on_corpus(&corpus, &cfg, &layout, 100, 42, &params)?;
    let json = selector.to_json()?;
    println!("\nselector JSON is {} bytes; first weights row {:?}", json.len(), selector.weights[0]);
    Ok(())
}
