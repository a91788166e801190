//! Fuses confidence features with external language-ID posteriors.
//!
//! ```text
//! cargo run --release --example lid_fusion
//! ```

use confens::selector::AuxSource;
use confens::simulator::stress_preset;
use confens::tuning::{grid_search, LrGrid, SearchOptions, SearchSpace};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    let corpus = confens::simulate(&stress_preset("short_audio")?)?;
    let cfg = ConfidenceConfig::default_preset();
    let lid = AuxSource {
        source_id: "lid".into(),
        dim: corpus.num_models(),
    };
    let variants = [("confidence", true, false), ("lid", false, true), ("combined", true, true)];

    println!("{:>6} {:>11} {:>8} {:>9}", "audio", variants[0].0, variants[1].0, variants[2].0);
    for duration in [3.0, 5.0, 10.0] {
        let c = corpus.truncated(duration)?;
        let scores = variants
            .iter()
            .map(|&(_, conf, aux)| {
                let options = SearchOptions {
                    confidence_features: conf,
                    aux_sources: if aux { vec![lid.clone()] } else { Vec::new() },
                    ..SearchOptions::default()
                };
                let r = grid_search(&c, &SearchSpace::single(&cfg), &LrGrid::default(), &options, None)?;
                Ok(r.validation_a_avg)
            })
            .collect::<confens::Result<Vec<_>>>()?;
        println!(
            "{:>4} s {:>11.4} {:>8.4} {:>9.4}",
            duration, scores[0], scores[1], scores[2]
        );
    }
    Ok(())
}
