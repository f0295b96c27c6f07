//! Stratified k-fold plans and cross-validated pipeline fitness.
//!
//! ```bash
//! cargo run --example cross_validation
//! ```

use sprout::corpus::stratified_kfold;
use sprout::evolve::{evaluate_fitness, FitnessMetric, Genome};
use sprout::pipeline::{OpKind, OperatorNode, PipelineSpec};
use sprout::synth;

fn main() {
    let ds = synth::marker_corpus(30, 3, 6);
    let plan = stratified_kfold(&ds, 5, 0).unwrap();

    println!("5-fold plan over {} rows (seed 0):", ds.len());
    for (fold, (train, valid)) in plan.folds().iter().enumerate() {
        let counts: Vec<usize> = (0..ds.n_classes())
            .map(|c| valid.iter().filter(|&&i| ds.labels()[i] == c).count())
            .collect();
        println!(
            "  fold {fold}: {} train / {} valid, per-class valid counts {counts:?}",
            train.len(),
            valid.len()
        );
    }

    // Mean cross-validated accuracy of a bare vectorizer + classifier chain.
    let genome = Genome::from_spec(
        PipelineSpec::from_stages(
            vec![
                OperatorNode::new(OpKind::CountVectorize).with_int("min_df", 1),
                OperatorNode::new(OpKind::LogisticRegression).with_float("c", 1.0),
            ],
            None,
        )
        .unwrap(),
    );
    let scored = evaluate_fitness(&genome, &ds, &plan, FitnessMetric::Accuracy, 300.0, 0);
    println!(
        "\nbare chain {} scores {:.4} mean CV accuracy",
        genome.spec.summary(),
        scored.fitness.unwrap()
    );
}
