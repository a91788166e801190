//! Word error rates with alignment counts, and a full evaluation table.
//!
//! ```text
//! cargo run --release --example wer_report
//! ```

use confens::metrics::{tokenize, wer};
use confens::pipeline::render_report;
use confens::probstream::Split;
use confens::selector::{ClassWeighting, FeatureLayout, TrainParams};
use confens::simulator::stress_preset;
use confens::tuning::{evaluate_config, train_on_corpus};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    for (r, h) in [("a b c", "a x c d"), ("the cat sat", "the cat sat"), ("a b", "")] {
        let c = wer(&tokenize(r), &tokenize(h))?;
        println!(
            "{r:>12} | {h:<8} S={} D={} I={} N={}  WER {:.3}",
            c.substitutions,
            c.deletions,
            c.insertions,
            c.reference_words,
            c.wer()
        );
    }

    let corpus = confens::simulate(&stress_preset("domain_shift")?)?;
    let cfg = ConfidenceConfig::default_preset();
    let layout = FeatureLayout::confidences(corpus.models(), 0);
    let selector = train_on_corpus(&corpus, &cfg, &layout, 100, 42, &TrainParams::new(0.01, ClassWeighting::Uniform))?;
    let report = evaluate_config(&corpus, &cfg, &selector, Split::Test)?;
    println!();
    print!("{}", render_report(&report));
    Ok(())
}
