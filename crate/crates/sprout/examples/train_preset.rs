//! Fit a preset pipeline end to end and score held-out documents.
//!
//! ```bash
//! cargo run --example train_preset
//! ```

use sprout::metrics::{confusion_matrix, multiclass_report};
use sprout::pipeline::{fit_pipeline, predict_pipeline, preset, FitOptions};
use sprout::synth;

fn main() {
    let train = synth::marker_corpus(90, 3, 11);
    let test = synth::marker_corpus(45, 3, 12);

    let spec = preset("subtask2").unwrap();
    println!("pipeline: {}", spec.summary());

    let fitted = fit_pipeline(&spec, &train, &FitOptions::with_seed(0)).unwrap();
    let predictions = predict_pipeline(&fitted, test.documents(), None).unwrap();

    let cm = confusion_matrix(test.labels(), &predictions.labels, test.n_classes()).unwrap();
    let report = multiclass_report(&cm).unwrap();
    print!("{}", report.render_text());

    println!("\nfirst five test documents:");
    for (doc, &label) in test.documents().iter().zip(&predictions.labels).take(5) {
        println!("  {:?} -> {}", doc, test.label_names()[label]);
    }
}
