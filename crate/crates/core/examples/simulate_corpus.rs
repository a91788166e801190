//! Generates a stress-scenario corpus, writes it to disk and reads it back.
//!
//! ```text
//! cargo run --release --example simulate_corpus -- [preset] [out-dir]
//! ```

use std::path::PathBuf;

use confens::probstream::{load_corpus, Split};
use confens::simulator::{simulate_to_dir, stress_preset, PRESET_NAMES};

fn main() -> confens::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "overconfident".into());
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("confens-{preset}")));

    let spec = stress_preset(&preset)?;
    println!("presets: {}", PRESET_NAMES.join(", "));
    println!(
        "{preset}: {} models, {} datasets, V = {}, steps {:?}, seed {}",
        spec.models.len(),
        spec.datasets.len(),
        spec.vocab_size,
        spec.steps_range,
        spec.seed
    );

    let corpus = simulate_to_dir(&spec, &out)?;
    let reloaded = load_corpus(&out)?;
    assert_eq!(corpus, reloaded);
    println!("wrote {}", out.display());

    for split in [Split::Train, Split::Validation, Split::Test] {
        let n = corpus.utterances(split).len();
        if n > 0 {
            println!("  {:<10} {n} utterances", split.as_str());
        }
    }
    let first = &corpus.utterances(Split::Validation)[0];
    println!("first validation utterance {} ({})", first.record.utterance_id, first.dataset_id);
    println!("  reference:  {}", first.record.reference_words.join(" "));
    for (model, hyp) in &first.record.hypotheses {
        let stream = &hyp.streams[0];
        println!(
            "  {model:<10}  {} ({} steps, layers {:?})",
            hyp.hypothesis_words.join(" "),
            stream.steps.len(),
            first.record.layers(model)
        );
    }
    Ok(())
}
