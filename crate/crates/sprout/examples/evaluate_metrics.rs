//! Confusion matrices and the binary / micro / macro F1 family.
//!
//! ```bash
//! cargo run --example evaluate_metrics
//! ```

use sprout::metrics::{
    binary_report, confusion_matrix, f1_from_precision_recall, multiclass_report,
};

fn main() {
    // Binary: published precision/recall pairs pin down F1.
    let f = f1_from_precision_recall(0.3065, 0.5672);
    println!("precision 30.65%, recall 56.72% -> balanced F {:.2}%", f * 100.0);

    let y_true = [0, 0, 1, 1, 1, 0, 1, 0];
    let y_pred = [0, 1, 1, 1, 0, 0, 1, 0];
    let cm = confusion_matrix(&y_true, &y_pred, 2).unwrap();
    println!("\nconfusion counts: {:?}", cm.counts());
    print!("{}", binary_report(&cm).unwrap().render_text());

    // Multiclass: micro-F1 coincides with accuracy for single-label data.
    let y_true = [0, 1, 2, 2, 1, 0, 2, 1, 0, 2];
    let y_pred = [0, 1, 2, 1, 1, 0, 2, 2, 0, 2];
    let cm = confusion_matrix(&y_true, &y_pred, 3).unwrap();
    let report = multiclass_report(&cm).unwrap();
    println!();
    print!("{}", report.render_text());
    assert_eq!(report.micro_f1, report.accuracy);
    println!("\nmicro-F1 equals accuracy exactly, as it must for single-label data.");
}
