//! Typed pipeline chains: specification, fitting, prediction and a
//! versioned on-disk document format.
//!
//! A pipeline is a linear chain of transform stages under a single
//! classifier root. Documents always enter through a `CountVectorize`
//! stage, so the deepest node of every valid spec is the vectorizer and the
//! root is the classifier. Errors raised while fitting or predicting are
//! annotated with the zero-based stage index they came from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::features::{
    apply_one_hot, fit_one_hot, fit_vectorizer, transform_counts, OneHotMap, Vocabulary,
};
use crate::forest::{
    argmax_lowest, class_distributions, fit_extra_trees, ExtraTreesModel, ForestParams,
    MaxFeatures,
};
use crate::linear::{apply_threshold, fit_logistic, predict_proba, LogisticModel, LogisticParams};
use crate::select::{anova_f_scores, rfe, select_percentile, FeatureMask};
use crate::sparse::SparseMatrix;

/// Document format version written by [`serialize_pipeline`].
pub const FORMAT_VERSION: &str = "1";

/// The operator vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    CountVectorize,
    SelectPercentile,
    OneHot,
    Rfe,
    ExtraTreesClassifier,
    LogisticRegression,
}

/// Whether an operator transforms features or sits at the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Transform,
    Classifier,
}

impl OpKind {
    pub fn role(&self) -> Role {
        match self {
            OpKind::CountVectorize | OpKind::SelectPercentile | OpKind::OneHot | OpKind::Rfe => {
                Role::Transform
            }
            OpKind::ExtraTreesClassifier | OpKind::LogisticRegression => Role::Classifier,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::CountVectorize => "CountVectorize",
            OpKind::SelectPercentile => "SelectPercentile",
            OpKind::OneHot => "OneHot",
            OpKind::Rfe => "Rfe",
            OpKind::ExtraTreesClassifier => "ExtraTreesClassifier",
            OpKind::LogisticRegression => "LogisticRegression",
        }
    }
}

/// A hyperparameter value; floats come from finite registry grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl HyperValue {
    fn render(&self) -> String {
        match self {
            HyperValue::Int(v) => v.to_string(),
            HyperValue::Float(v) => format!("{v}"),
            HyperValue::Text(v) => v.clone(),
        }
    }
}

/// One operator with its hyperparameters and (at most one) child.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNode {
    pub kind: OpKind,
    #[serde(default)]
    pub params: BTreeMap<String, HyperValue>,
    #[serde(default)]
    pub children: Vec<OperatorNode>,
}

impl OperatorNode {
    pub fn new(kind: OpKind) -> OperatorNode {
        OperatorNode {
            kind,
            params: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    pub fn with_int(mut self, key: &str, value: i64) -> OperatorNode {
        self.params.insert(key.to_string(), HyperValue::Int(value));
        self
    }

    pub fn with_float(mut self, key: &str, value: f64) -> OperatorNode {
        self.params.insert(key.to_string(), HyperValue::Float(value));
        self
    }

    pub fn with_text(mut self, key: &str, value: &str) -> OperatorNode {
        self.params
            .insert(key.to_string(), HyperValue::Text(value.to_string()));
        self
    }

    pub fn int_param(&self, key: &str, default: i64) -> Result<i64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(HyperValue::Int(v)) => Ok(*v),
            Some(other) => Err(Error::Config(format!(
                "{}.{key} must be an integer, got {other:?}",
                self.kind.name()
            ))),
        }
    }

    pub fn float_param(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(HyperValue::Float(v)) => Ok(*v),
            Some(HyperValue::Int(v)) => Ok(*v as f64),
            Some(other) => Err(Error::Config(format!(
                "{}.{key} must be a number, got {other:?}",
                self.kind.name()
            ))),
        }
    }

    pub fn text_param(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(HyperValue::Text(v)) => Ok(v.clone()),
            Some(other) => Err(Error::Config(format!(
                "{}.{key} must be a string, got {other:?}",
                self.kind.name()
            ))),
        }
    }

    fn render(&self) -> String {
        if self.params.is_empty() {
            return self.kind.name().to_string();
        }
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={}", v.render()))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{}({params})", self.kind.name())
    }
}

/// A full pipeline: classifier root over a linear transform chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub root: OperatorNode,
    pub name: Option<String>,
}

impl PipelineSpec {
    /// Build a chain from stages in execution order (vectorizer first,
    /// classifier last).
    pub fn from_stages(mut stages: Vec<OperatorNode>, name: Option<String>) -> Result<PipelineSpec> {
        if stages.is_empty() {
            return Err(Error::Config("a pipeline needs at least one stage".into()));
        }
        let mut node = stages.remove(0);
        for mut next in stages {
            next.children = vec![node];
            node = next;
        }
        let spec = PipelineSpec { root: node, name };
        spec.validate_shape()?;
        Ok(spec)
    }

    /// Stages in execution order: deepest node first, root last.
    pub fn stages(&self) -> Vec<&OperatorNode> {
        let mut chain = Vec::new();
        let mut node = &self.root;
        loop {
            chain.push(node);
            match node.children.first() {
                Some(child) => node = child,
                None => break,
            }
        }
        chain.reverse();
        chain
    }

    /// Number of stages, classifier included.
    pub fn n_stages(&self) -> usize {
        self.stages().len()
    }

    /// Transform stages only (everything under the root).
    pub fn n_transforms(&self) -> usize {
        self.n_stages() - 1
    }

    /// Check the chain-shape contract.
    pub fn validate_shape(&self) -> Result<()> {
        let mut node = &self.root;
        loop {
            if node.children.len() > 1 {
                return Err(Error::Config(format!(
                    "{} has {} children; chains allow at most one",
                    node.kind.name(),
                    node.children.len()
                )));
            }
            match node.children.first() {
                Some(child) => node = child,
                None => break,
            }
        }
        let stages = self.stages();
        let (classifier, transforms) = stages.split_last().unwrap();
        if classifier.kind.role() != Role::Classifier {
            return Err(Error::Config(format!(
                "pipeline root must be a classifier, got {}",
                classifier.kind.name()
            )));
        }
        if transforms.is_empty() || transforms[0].kind != OpKind::CountVectorize {
            return Err(Error::Config(
                "the first stage must be CountVectorize (documents enter as text)".into(),
            ));
        }
        for stage in transforms.iter().skip(1) {
            if stage.kind == OpKind::CountVectorize {
                return Err(Error::Config(
                    "CountVectorize may appear only as the first stage".into(),
                ));
            }
            if stage.kind.role() != Role::Transform {
                return Err(Error::Config(format!(
                    "{} cannot appear below the root",
                    stage.kind.name()
                )));
            }
        }
        Ok(())
    }

    /// Compact `A -> B -> C` rendering with hyperparameters.
    pub fn summary(&self) -> String {
        self.stages()
            .iter()
            .map(|s| s.render())
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

/// Fitted artifact of one stage, in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FittedState {
    Vocabulary(Vocabulary),
    OneHot(OneHotMap),
    Mask(FeatureMask),
    Forest(ExtraTreesModel),
    Logistic(LogisticModel),
}

impl FittedState {
    fn matches(&self, kind: OpKind) -> bool {
        matches!(
            (self, kind),
            (FittedState::Vocabulary(_), OpKind::CountVectorize)
                | (FittedState::Mask(_), OpKind::SelectPercentile)
                | (FittedState::Mask(_), OpKind::Rfe)
                | (FittedState::OneHot(_), OpKind::OneHot)
                | (FittedState::Forest(_), OpKind::ExtraTreesClassifier)
                | (FittedState::Logistic(_), OpKind::LogisticRegression)
        )
    }
}

/// A pipeline with all stage artifacts fitted, ready to predict.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedPipeline {
    pub spec: PipelineSpec,
    pub states: Vec<FittedState>,
    pub label_names: Vec<String>,
    /// Seed the stages were fitted with; recorded for reproducibility.
    pub seed: u64,
}

/// Knobs shared by every stage fit.
#[derive(Clone, Copy, Debug, Default)]
pub struct FitOptions {
    pub seed: u64,
    pub deadline: Deadline,
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> FitOptions {
        FitOptions {
            seed,
            deadline: Deadline::NONE,
        }
    }
}

/// The two pipeline presets shipped with the crate.
///
/// `subtask1`: CountVectorize -> Rfe (extra-trees importances) -> L2
/// logistic regression. `subtask2`: CountVectorize -> SelectPercentile(6)
/// -> OneHot -> L2 logistic regression with C = 0.05.
pub fn preset(name: &str) -> Result<PipelineSpec> {
    let stages = match name {
        "subtask1" => vec![
            OperatorNode::new(OpKind::CountVectorize).with_int("min_df", 1),
            OperatorNode::new(OpKind::Rfe)
                .with_float("target_ratio", 0.25)
                .with_float("step", 0.1)
                .with_int("n_trees", 100),
            OperatorNode::new(OpKind::LogisticRegression).with_float("c", 1.0),
        ],
        "subtask2" => vec![
            OperatorNode::new(OpKind::CountVectorize).with_int("min_df", 1),
            OperatorNode::new(OpKind::SelectPercentile).with_int("percentile", 6),
            OperatorNode::new(OpKind::OneHot).with_int("max_categories", 10),
            OperatorNode::new(OpKind::LogisticRegression).with_float("c", 0.05),
        ],
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; expected \"subtask1\" or \"subtask2\""
            )))
        }
    };
    PipelineSpec::from_stages(stages, Some(name.to_string()))
}

/// Per-stage seed: the fit seed xored with a golden-ratio multiple of the
/// stage index, so stages draw from unrelated streams.
fn stage_seed(seed: u64, stage: usize) -> u64 {
    seed ^ (stage as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn forest_params_from(node: &OperatorNode, seed: u64) -> Result<ForestParams> {
    let max_features = match node.text_param("max_features", "sqrt")?.as_str() {
        "sqrt" => MaxFeatures::Sqrt,
        other => {
            let f: f64 = other.parse().map_err(|_| {
                Error::Config(format!("max_features must be \"sqrt\" or a fraction, got {other:?}"))
            })?;
            MaxFeatures::Fraction(f)
        }
    };
    Ok(ForestParams {
        n_trees: node.int_param("n_trees", 100)? as usize,
        max_features,
        min_samples_split: node.int_param("min_samples_split", 2)? as usize,
        max_depth: None,
        seed,
    })
}

/// Fit every stage in order, each consuming the previous stage's output.
pub fn fit_pipeline(spec: &PipelineSpec, ds: &Dataset, opts: &FitOptions) -> Result<FittedPipeline> {
    spec.validate_shape()?;
    let stages = spec.stages();
    let y = ds.labels();
    let mut states = Vec::with_capacity(stages.len());
    let mut x: Option<SparseMatrix> = None;
    for (i, stage) in stages.iter().enumerate() {
        let annotate = |e: Error| e.at_stage(i, stage.kind.name());
        opts.deadline.check().map_err(annotate)?;
        let seed = stage_seed(opts.seed, i);
        match stage.kind {
            OpKind::CountVectorize => {
                let min_df = stage.int_param("min_df", 1).map_err(annotate)? as usize;
                let vocab = fit_vectorizer(ds.documents(), min_df).map_err(annotate)?;
                x = Some(transform_counts(ds.documents(), &vocab));
                states.push(FittedState::Vocabulary(vocab));
            }
            OpKind::SelectPercentile => {
                let percentile = stage.float_param("percentile", 10.0).map_err(annotate)?;
                let matrix = x.as_ref().expect("vectorizer ran first");
                let mask = anova_f_scores(matrix, y)
                    .and_then(|scores| select_percentile(&scores, percentile))
                    .map_err(annotate)?;
                x = Some(mask.apply(matrix).map_err(annotate)?);
                states.push(FittedState::Mask(mask));
            }
            OpKind::Rfe => {
                let ratio = stage.float_param("target_ratio", 0.25).map_err(annotate)?;
                let step = stage.float_param("step", 0.1).map_err(annotate)?;
                let fp = forest_params_from(stage, seed).map_err(annotate)?;
                let matrix = x.as_ref().expect("vectorizer ran first");
                let target = ((ratio * matrix.n_cols() as f64).round() as usize)
                    .clamp(1, matrix.n_cols().max(1));
                let mask = rfe(matrix, y, target, step, &fp, opts.deadline).map_err(annotate)?;
                x = Some(mask.apply(matrix).map_err(annotate)?);
                states.push(FittedState::Mask(mask));
            }
            OpKind::OneHot => {
                let max_categories =
                    stage.int_param("max_categories", 10).map_err(annotate)? as usize;
                let matrix = x.as_ref().expect("vectorizer ran first");
                let map = fit_one_hot(matrix, max_categories);
                x = Some(apply_one_hot(matrix, &map).map_err(annotate)?);
                states.push(FittedState::OneHot(map));
            }
            OpKind::ExtraTreesClassifier => {
                let fp = forest_params_from(stage, seed).map_err(annotate)?;
                let matrix = x.as_ref().expect("vectorizer ran first");
                let model = fit_extra_trees(matrix, y, &fp, opts.deadline).map_err(annotate)?;
                states.push(FittedState::Forest(model));
            }
            OpKind::LogisticRegression => {
                let params = LogisticParams {
                    c: stage.float_param("c", 1.0).map_err(annotate)?,
                    ..LogisticParams::default()
                };
                let matrix = x.as_ref().expect("vectorizer ran first");
                let model = fit_logistic(matrix, y, &params, opts.deadline).map_err(annotate)?;
                states.push(FittedState::Logistic(model));
            }
        }
    }
    Ok(FittedPipeline {
        spec: spec.clone(),
        states,
        label_names: ds.label_names().to_vec(),
        seed: opts.seed,
    })
}

/// Labels plus per-row class probabilities over the full label space.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Run documents through the fitted transforms and classifier.
///
/// `threshold` replaces the argmax decision for binary pipelines: label 1
/// iff the positive-class probability is at least `threshold`.
pub fn predict_pipeline(
    fp: &FittedPipeline,
    docs: &[String],
    threshold: Option<f64>,
) -> Result<Predictions> {
    let k = fp.label_names.len();
    if threshold.is_some() && k != 2 {
        return Err(Error::Config(format!(
            "a decision threshold needs a binary pipeline, this one has {k} classes"
        )));
    }
    let stages = fp.spec.stages();
    if stages.len() != fp.states.len() {
        return Err(Error::Format(format!(
            "{} stages but {} fitted states",
            stages.len(),
            fp.states.len()
        )));
    }

    let mut x: Option<SparseMatrix> = None;
    let mut probabilities: Vec<Vec<f64>> = Vec::new();
    for (i, (stage, state)) in stages.iter().zip(&fp.states).enumerate() {
        let annotate = |e: Error| e.at_stage(i, stage.kind.name());
        let check_width = |m: &SparseMatrix, expected: usize| -> Result<()> {
            if m.n_cols() != expected {
                return Err(Error::Shape(format!(
                    "stage input has {} columns, fitted state expects {expected}",
                    m.n_cols()
                )));
            }
            Ok(())
        };
        match state {
            FittedState::Vocabulary(vocab) => {
                x = Some(transform_counts(docs, vocab));
            }
            FittedState::Mask(mask) => {
                let matrix = x.as_ref().expect("vectorizer ran first");
                check_width(matrix, mask.n_in()).map_err(annotate)?;
                x = Some(mask.apply(matrix).map_err(annotate)?);
            }
            FittedState::OneHot(map) => {
                let matrix = x.as_ref().expect("vectorizer ran first");
                check_width(matrix, map.n_in()).map_err(annotate)?;
                x = Some(apply_one_hot(matrix, map).map_err(annotate)?);
            }
            FittedState::Forest(model) => {
                let matrix = x.as_ref().expect("vectorizer ran first");
                check_width(matrix, model.n_features).map_err(annotate)?;
                let dists = class_distributions(model, matrix).map_err(annotate)?;
                probabilities = scatter(dists, &(0..model.n_classes).collect::<Vec<_>>(), k)
                    .map_err(annotate)?;
            }
            FittedState::Logistic(model) => {
                let matrix = x.as_ref().expect("vectorizer ran first");
                check_width(matrix, model.n_features()).map_err(annotate)?;
                let probs = predict_proba(model, matrix).map_err(annotate)?;
                probabilities = scatter(probs, &model.classes, k).map_err(annotate)?;
            }
        }
    }

    let labels = match threshold {
        Some(t) => {
            let positive: Vec<f64> = probabilities.iter().map(|row| row[1]).collect();
            apply_threshold(&positive, t)?
        }
        None => probabilities.iter().map(|row| argmax_lowest(row)).collect(),
    };
    Ok(Predictions {
        labels,
        probabilities,
    })
}

/// Spread model-class probabilities into the full label space.
fn scatter(rows: Vec<Vec<f64>>, classes: &[usize], k: usize) -> Result<Vec<Vec<f64>>> {
    if classes.iter().any(|&c| c >= k) {
        return Err(Error::Shape(format!(
            "model predicts class {} outside the {k}-class label space",
            classes.iter().max().unwrap()
        )));
    }
    Ok(rows
        .into_iter()
        .map(|row| {
            let mut full = vec![0.0; k];
            for (&class, p) in classes.iter().zip(row) {
                full[class] = p;
            }
            full
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct PipelineDocument {
    format_version: String,
    name: Option<String>,
    seed: u64,
    label_names: Vec<String>,
    spec: PipelineSpec,
    states: Vec<FittedState>,
}

/// Serialize to the versioned JSON document format.
///
/// Floats are written with the shortest decimal that parses back to the
/// same bits, so a round trip reproduces predictions exactly.
pub fn serialize_pipeline(fp: &FittedPipeline) -> Result<String> {
    let doc = PipelineDocument {
        format_version: FORMAT_VERSION.to_string(),
        name: fp.spec.name.clone(),
        seed: fp.seed,
        label_names: fp.label_names.clone(),
        spec: fp.spec.clone(),
        states: fp.states.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
}

/// Parse a pipeline document, checking version and structural consistency.
pub fn deserialize_pipeline(doc: &str) -> Result<FittedPipeline> {
    let value: serde_json::Value =
        serde_json::from_str(doc).map_err(|e| Error::Format(format!("invalid document: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Format("document is missing format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version(version.to_string()));
    }
    let doc: PipelineDocument = serde_json::from_value(value)
        .map_err(|e| Error::Format(format!("invalid document: {e}")))?;
    let fp = FittedPipeline {
        spec: doc.spec,
        states: doc.states,
        label_names: doc.label_names,
        seed: doc.seed,
    };
    fp.spec.validate_shape()?;
    let stages = fp.spec.stages();
    if stages.len() != fp.states.len() {
        return Err(Error::Format(format!(
            "document has {} stages but {} fitted states",
            stages.len(),
            fp.states.len()
        )));
    }
    for (stage, state) in stages.iter().zip(&fp.states) {
        if !state.matches(stage.kind) {
            return Err(Error::Format(format!(
                "fitted state does not match stage {}",
                stage.kind.name()
            )));
        }
    }
    Ok(fp)
}
