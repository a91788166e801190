//! Entropy-based confidence of single distributions and of whole streams.
//!
//! ```text
//! cargo run --release --example confidence_measures
//! ```

use confens::confidence::{
    entropy, max_entropy, normalize_entropy, step_distribution, stream_confidence, Aggregation,
    ConfidenceConfig, Measure, Normalization,
};
use confens::probstream::{Split, StreamKind};
use confens::simulator::stress_preset;

fn main() -> confens::Result<()> {
    let peaked = [0.90, 0.05, 0.03, 0.02];
    let flat_tail = [0.90, 0.10 / 3.0, 0.10 / 3.0, 0.10 / 3.0];
    println!("{:<8} {:>6} {:>10} {:>10}", "measure", "alpha", "peaked", "flat tail");
    for (measure, alpha) in [
        (Measure::Gibbs, 1.0),
        (Measure::Tsallis, 0.33),
        (Measure::Renyi, 0.25),
        (Measure::Renyi, 0.5),
    ] {
        let h_max = max_entropy(peaked.len(), measure, alpha);
        let conf = |p: &[f64]| normalize_entropy(entropy(p, measure, alpha), h_max, Normalization::Linear);
        println!(
            "{:<8} {alpha:>6} {:>10.4} {:>10.4}",
            format!("{measure:?}").to_lowercase(),
            conf(&peaked),
            conf(&flat_tail)
        );
    }

    // temperature reshapes logits before any measure sees them
    let logits = [4.0, 1.0, 0.5, 0.0];
    for t in [0.25, 1.0, 4.0] {
        let p = step_distribution(&logits, StreamKind::Logits, t)?;
        let shown: Vec<String> = p.iter().map(|x| format!("{x:.3}")).collect();
        println!("T = {t:<4} p = [{}]", shown.join(", "));
    }

    // per-model stream confidences of one simulated utterance
    let corpus = confens::simulate(&stress_preset("overconfident")?)?;
    let u = &corpus.utterances(Split::Validation)[0];
    println!("\nutterance {} (matched model index {})", u.record.utterance_id, u.label);
    let configs = [
        ("untuned max-prob", ConfidenceConfig::untuned_max_prob()),
        ("default", ConfidenceConfig::default_preset()),
        (
            "renyi min T=0.5",
            ConfidenceConfig {
                aggregation: Aggregation::Min,
                temperature: 0.5,
                ..ConfidenceConfig::default_preset()
            },
        ),
    ];
    for (name, cfg) in configs {
        let row = corpus
            .models()
            .iter()
            .map(|m| Ok(format!("{:.4}", stream_confidence(u.record.select_layer(m, 0)?, &cfg)?)))
            .collect::<confens::Result<Vec<_>>>()?;
        println!("  {name:<18} {}", row.join("  "));
    }
    Ok(())
}
