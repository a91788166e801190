//! Model selection from intermediate-layer outputs instead of the final layer.
//!
//! ```text
//! cargo run --release --example intermediate_layers
//! ```

use confens::confidence::{entropy, step_distribution, Measure};
use confens::probstream::Split;
use confens::simulator::stress_preset;
use confens::tuning::{grid_search, LrGrid, SearchOptions, SearchSpace};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    let corpus = confens::simulate(&stress_preset("layered")?)?;
    let cfg = ConfidenceConfig::default_preset();
    for layer_id in [4, 9, 0] {
        let options = SearchOptions {
            layer_id,
            ..SearchOptions::default()
        };
        let r = grid_search(&corpus, &SearchSpace::single(&cfg), &LrGrid::default(), &options, None)?;

        let (mut total, mut n) = (0.0, 0usize);
        for u in corpus.utterances(Split::Validation) {
            for m in corpus.models() {
                let s = u.record.select_layer(m, layer_id)?;
                for step in &s.steps {
                    total += entropy(&step_distribution(&step.values, s.kind, 1.0)?, Measure::Gibbs, 1.0);
                    n += 1;
                }
            }
        }
        let name = if layer_id == 0 { "final".to_string() } else { format!("layer {layer_id}") };
        println!(
            "{name:<8} A_avg {:.4}   mean step entropy {:.3} nats",
            r.validation_a_avg,
            total / n as f64
        );
    }
    Ok(())
}
