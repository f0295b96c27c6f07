//! Small deterministic synthetic corpora for demos and tests.
//!
//! Documents are filler words plus a per-class marker token, so the label is
//! exactly "which marker appears" — easy prey for any sensible pipeline.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Dataset;

const FILLER: &[&str] = &[
    "zielony", "rower", "ulica", "kawa", "okno", "miasto", "ranek", "chmura", "most", "ogrod",
    "szkola", "autobus", "gazeta", "piosenka", "telefon",
];

const MARKERS: &[&str] = &["spokojny", "alarmowy", "burzowy", "cieply"];

/// Balanced corpus of `n` documents over `n_classes` classes (round-robin
/// labels); document `i` contains the marker word of its class.
pub fn marker_corpus(n: usize, n_classes: usize, seed: u64) -> Dataset {
    assert!(n_classes >= 2 && n_classes <= MARKERS.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % n_classes;
        let mut words: Vec<&str> = (0..rng.gen_range(4..9))
            .map(|_| *FILLER.choose(&mut rng).unwrap())
            .collect();
        words.push(MARKERS[label]);
        words.shuffle(&mut rng);
        documents.push(words.join(" "));
        labels.push(label);
    }
    let label_names = (0..n_classes).map(|c| c.to_string()).collect();
    Dataset::new(documents, labels, label_names).expect("synthetic corpus is consistent")
}

/// Two-class [`marker_corpus`].
pub fn binary_corpus(n: usize, seed: u64) -> Dataset {
    marker_corpus(n, 2, seed)
}
