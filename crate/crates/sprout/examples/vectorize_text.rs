//! Tokenize documents and build a sparse count matrix.
//!
//! ```bash
//! cargo run --example vectorize_text
//! ```

use sprout::features::{fit_vectorizer, tokenize, transform_counts};

fn main() {
    let docs: Vec<String> = [
        "Ala ma kota, a kot ma Ale.",
        "Pies sasiada szczeka na kota.",
        "Kot i pies spia na kanapie.",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    println!("tokens of doc 0: {:?}", tokenize(&docs[0]));

    let vocab = fit_vectorizer(&docs, 1).expect("min_df is valid");
    println!("\nvocabulary ({} terms): {:?}", vocab.len(), vocab.terms());

    let counts = transform_counts(&docs, &vocab);
    println!(
        "\ncount matrix: {} x {} with {} stored entries",
        counts.n_rows(),
        counts.n_cols(),
        counts.nnz()
    );
    for (i, row) in counts.to_dense().iter().enumerate() {
        println!("  doc {i}: {row:?}");
    }

    // A stricter document-frequency cutoff shrinks the vocabulary.
    let frequent = fit_vectorizer(&docs, 2).unwrap();
    println!("\nterms appearing in at least two documents: {:?}", frequent.terms());
}
