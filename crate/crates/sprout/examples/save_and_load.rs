//! Serialize a fitted pipeline to the versioned document format and load it
//! back with identical behavior.
//!
//! ```bash
//! cargo run --example save_and_load
//! ```

use sprout::pipeline::{
    deserialize_pipeline, fit_pipeline, predict_pipeline, preset, serialize_pipeline, FitOptions,
};
use sprout::synth;

fn main() {
    let train = synth::binary_corpus(60, 19);
    let probe = synth::binary_corpus(12, 20);

    let fitted = fit_pipeline(&preset("subtask2").unwrap(), &train, &FitOptions::with_seed(1))
        .unwrap();
    let document = serialize_pipeline(&fitted).unwrap();
    println!(
        "document: {} bytes of JSON, format_version 1; first lines:\n",
        document.len()
    );
    for line in document.lines().take(8) {
        println!("  {line}");
    }

    let restored = deserialize_pipeline(&document).unwrap();
    let before = predict_pipeline(&fitted, probe.documents(), None).unwrap();
    let after = predict_pipeline(&restored, probe.documents(), None).unwrap();
    assert_eq!(before.probabilities, after.probabilities);
    println!("\nround trip reproduces all {} predictions bit-for-bit.", before.labels.len());
}
