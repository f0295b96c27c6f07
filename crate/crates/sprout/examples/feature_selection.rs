//! Univariate percentile selection and recursive feature elimination.
//!
//! ```bash
//! cargo run --example feature_selection
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sprout::budget::Deadline;
use sprout::forest::ForestParams;
use sprout::select::{anova_f_scores, rfe, select_percentile};
use sprout::sparse::SparseMatrix;

fn main() {
    // 12 features, two of them (3 and 7) informative for the label.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 150;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for feature in 0..12usize {
            let value = if feature == 3 || feature == 7 {
                (label * 2 + rng.gen_range(0..2)) as f64
            } else {
                rng.gen_range(0..3) as f64
            };
            if value != 0.0 {
                row.push((feature, value));
            }
        }
        rows.push(row);
        labels.push(label);
    }
    let x = SparseMatrix::from_rows(12, &rows).unwrap();

    let scores = anova_f_scores(&x, &labels).unwrap();
    println!("ANOVA F scores:");
    for (feature, score) in scores.iter().enumerate() {
        println!("  feature {feature}: {score:.2}");
    }

    let top = select_percentile(&scores, 25.0).unwrap();
    println!("\ntop 25% by F score: {:?}", top.selected());

    let fp = ForestParams {
        n_trees: 50,
        seed: 5,
        ..ForestParams::default()
    };
    let mask = rfe(&x, &labels, 2, 0.2, &fp, Deadline::NONE).unwrap();
    println!("RFE down to 2 columns: {:?}", mask.selected());
    println!("(the planted informative pair is [3, 7])");
}
