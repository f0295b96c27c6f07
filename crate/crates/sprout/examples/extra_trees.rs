//! Fit an extremely randomized forest and inspect feature importances.
//!
//! ```bash
//! cargo run --example extra_trees
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sprout::budget::Deadline;
use sprout::forest::{
    feature_importances, fit_extra_trees, predict_forest, ForestParams,
};
use sprout::sparse::SparseMatrix;

fn main() {
    // 120 rows, 6 features; only feature 2 carries the label.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 120;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for feature in 0..6usize {
            let value = if feature == 2 {
                (label * 2) as f64 + 1.0
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
    let x = SparseMatrix::from_rows(6, &rows).unwrap();

    let params = ForestParams {
        n_trees: 60,
        seed: 3,
        ..ForestParams::default()
    };
    let model = fit_extra_trees(&x, &labels, &params, Deadline::NONE).unwrap();

    let predictions = predict_forest(&model, &x).unwrap();
    let correct = predictions
        .iter()
        .zip(&labels)
        .filter(|(p, l)| p == l)
        .count();
    println!("training accuracy: {:.1}%", 100.0 * correct as f64 / n as f64);

    println!("\nfeature importances (sum = 1):");
    for (feature, importance) in feature_importances(&model).iter().enumerate() {
        let bar = "#".repeat((importance * 60.0).round() as usize);
        println!("  feature {feature}: {importance:.3} {bar}");
    }
    println!("\nfeature 2 is the planted signal and should dominate.");
}
