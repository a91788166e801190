//! Searches confidence configurations and LR hyperparameters by validation A_avg.
//!
//! A reduced space runs in seconds; pass `--full` for all 2960 configurations.
//!
//! ```text
//! cargo run --release --example grid_search [-- --full]
//! ```

use std::time::Instant;

use confens::confidence::{Aggregation, Measure};
use confens::simulator::stress_preset;
use confens::tuning::{enumerate_space, grid_search, LrGrid, SearchOptions, SearchSpace};

fn main() -> confens::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let space = if full {
        SearchSpace::default()
    } else {
        SearchSpace {
            temperatures: vec![0.25, 1.0, 2.0],
            alphas: vec![0.25, 0.5],
            measures: vec![Measure::MaxProb, Measure::Renyi, Measure::Tsallis],
            aggregations: vec![Aggregation::Mean, Aggregation::Min, Aggregation::Product],
            ..SearchSpace::default()
        }
    };
    println!("{} configurations", enumerate_space(&space).len());

    let corpus = confens::simulate(&stress_preset("overconfident")?)?;
    let start = Instant::now();
    let result = grid_search(&corpus, &space, &LrGrid::default(), &SearchOptions::default(), None)?;
    println!("searched in {:.1?}", start.elapsed());

    println!("best: {} with validation A_avg {:.4}", result.best_config, result.validation_a_avg);
    println!("top of the leaderboard:");
    for e in result.leaderboard.iter().take(8) {
        println!(
            "  {:.4}  {}  (l2 {}, {:?})",
            e.a_avg, e.config, e.l2_lambda, e.class_weighting
        );
    }
    println!("best configuration per dataset:");
    for (d, best) in &result.per_dataset_best {
        println!("  {d}: {:.4}  {}", best.accuracy, best.config);
    }
    Ok(())
}
