//! Shallow text-classification pipelines, grown from seeds.
//!
//! `sprout` builds linear chains of classic sparse-text operators — count
//! vectorization, univariate and recursive feature selection, one-hot
//! expansion — under an extremely-randomized-trees or L2 logistic regression
//! classifier, evaluates them with stratified cross-validation, and can
//! search the operator space with a small seeded genetic program. Every
//! fit, fold and search is reproducible from its seed, for any thread count.
//!
//! The quickest tour is the `examples/` directory, one runnable program per
//! capability:
//!
//! - **`vectorize_text`** — tokenization, vocabularies, sparse counts
//! - **`evaluate_metrics`** — confusion matrices, binary and micro/macro F1
//! - **`extra_trees`** — randomized forests and feature importances
//! - **`feature_selection`** — ANOVA percentile selection and RFE
//! - **`logistic_threshold`** — L2 logistic regression, threshold tuning
//! - **`cross_validation`** — stratified folds and pipeline fitness
//! - **`train_preset`** — the bundled presets, fitted end to end
//! - **`save_and_load`** — the versioned pipeline document format
//! - **`evolve_search`** — the genetic pipeline search
//!
//! ```bash
//! cargo run --example train_preset
//! ```
//!
//! A thin `sprout` binary wraps the same library for batch work
//! (`train`/`predict`/`evaluate`/`search`/`replicate`); see the README.

pub mod budget;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evolve;
pub mod features;
pub mod forest;
pub mod linear;
pub mod metrics;
pub mod pipeline;
pub mod select;
pub mod sparse;
pub mod synth;

pub use budget::Deadline;
pub use error::{Error, Result};
pub use sparse::SparseMatrix;
