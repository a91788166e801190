//! Selection accuracy as a function of how much audio the models have heard.
//!
//! ```text
//! cargo run --release --example duration_sweep
//! ```

use confens::simulator::stress_preset;
use confens::tuning::{grid_search, LrGrid, SearchOptions, SearchSpace};
use confens::ConfidenceConfig;

fn main() -> confens::Result<()> {
    let spec = stress_preset("short_audio")?;
    let corpus = confens::simulate(&spec)?;
    let cfg = ConfidenceConfig::default_preset();
    println!("frame rate {} Hz, utterances {:?} steps", spec.frame_rate_hz, spec.steps_range);

    for duration in [Some(3.0), Some(5.0), Some(10.0), Some(15.0), None] {
        let c = match duration {
            Some(d) => corpus.truncated(d)?,
            None => corpus.clone(),
        };
        let r = grid_search(&c, &SearchSpace::single(&cfg), &LrGrid::default(), &SearchOptions::default(), None)?;
        let label = duration.map_or("full".to_string(), |d| format!("{d} s"));
        println!("{label:>6}: A_avg {:.4}", r.validation_a_avg);
    }
    Ok(())
}
