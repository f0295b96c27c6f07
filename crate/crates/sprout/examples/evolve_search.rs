//! Run a small evolutionary pipeline search and print the generation log.
//!
//! ```bash
//! cargo run --example evolve_search
//! ```

use sprout::evolve::{run_search, FitnessMetric, SearchConfig};
use sprout::synth;

fn main() {
    let ds = synth::binary_corpus(120, 8);
    let cfg = SearchConfig {
        population_size: 12,
        generations: 5,
        cv_folds: 3,
        metric: FitnessMetric::F1Macro,
        seed: 4,
        ..SearchConfig::default()
    };

    let (best, log) = run_search(&cfg, &ds).unwrap();
    for entry in &log.generations {
        println!(
            "generation {}: best {:.4}  mean {:.4}  ({:.2}s)",
            entry.generation, entry.best_fitness, entry.mean_fitness, entry.elapsed_seconds
        );
        println!("  {}", entry.best_summary);
    }
    println!("\nwinner refit on the full corpus: {}", best.spec.summary());
    println!("rerun with the same seed to get the identical winner.");
}
