//! A base model and a finetuned copy: moving the decision threshold trades
//! source-domain quality against target-domain quality.
//!
//! ```text
//! cargo run --release --example threshold_tradeoff
//! ```

use confens::probstream::Split;
use confens::selector::{operating_point, tune_threshold, Threshold, ThresholdObjective};
use confens::simulator::stress_preset;
use confens::tuning::{evaluate_config, features_for, grid_search, LrGrid, SearchOptions, SearchSpace};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    let corpus = confens::simulate(&stress_preset("domain_shift")?)?;
    let cfg = ConfidenceConfig::default_preset();
    let trained = grid_search(&corpus, &SearchSpace::single(&cfg), &LrGrid::default(), &SearchOptions::default(), None)?;
    let selector = trained.best_selector;
    let layout = selector.layout.clone().expect("grid search records the layout");
    let validation = features_for(&corpus.utterances(Split::Validation), &cfg, &layout)?;

    println!("theta   base->base  target->finetuned");
    for theta in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let p = operating_point(&selector, &validation, Some(theta))?;
        println!("{theta:<7} {:>10.3} {:>18.3}", p.base_accuracy, p.target_accuracy);
    }

    println!("\nobjective      threshold   test WER (source_a / source_b / target)");
    for objective in [
        ThresholdObjective::FavorTarget,
        ThresholdObjective::Balanced,
        ThresholdObjective::FavorBase,
    ] {
        let tuned = tune_threshold(&selector, &validation, objective)?;
        let report = evaluate_config(&corpus, &cfg, &tuned, Split::Test)?;
        let wer = &report.wer["ensemble"];
        let threshold = match tuned.threshold {
            Threshold::Binary(t) => format!("{t:.3}"),
            _ => "argmax".into(),
        };
        println!(
            "{:<14} {threshold:>9}   {:.2}% / {:.2}% / {:.2}%",
            format!("{objective:?}"),
            100.0 * wer["source_a"],
            100.0 * wer["source_b"],
            100.0 * wer["target"]
        );
    }
    Ok(())
}
