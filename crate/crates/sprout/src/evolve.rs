//! Genetic-programming search over pipeline specs.
//!
//! Individuals are pipeline chains drawn from a finite operator registry
//! (discrete hyperparameter grids, so genomes hash and fitness caches by
//! content). Fitness is the mean cross-validated score of the configured
//! metric; individuals that error or exceed their wall-clock budget are
//! excluded from selection. Selection is a size-3 tournament with one elite
//! carried per generation, so the best fitness never decreases.
//!
//! Everything is reproducible from the search seed: per-individual
//! evaluation streams derive from `seed ^ genome_id` where the genome id is
//! a content hash of the spec, so concurrent and sequential evaluation give
//! byte-identical results.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::corpus::{stratified_kfold, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::metrics::{confusion_matrix, multiclass_report};
use crate::pipeline::{
    fit_pipeline, predict_pipeline, FitOptions, FittedPipeline, HyperValue, OpKind, OperatorNode,
    PipelineSpec, Role,
};

/// Score optimized by the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitnessMetric {
    #[default]
    Accuracy,
    F1Micro,
    F1Macro,
}

impl FitnessMetric {
    pub fn parse(name: &str) -> Result<FitnessMetric> {
        match name {
            "accuracy" => Ok(FitnessMetric::Accuracy),
            "f1_micro" => Ok(FitnessMetric::F1Micro),
            "f1_macro" => Ok(FitnessMetric::F1Macro),
            other => Err(Error::Config(format!(
                "unknown metric {other:?}; expected accuracy, f1_micro or f1_macro"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FitnessMetric::Accuracy => "accuracy",
            FitnessMetric::F1Micro => "f1_micro",
            FitnessMetric::F1Macro => "f1_macro",
        }
    }

    fn score(&self, y_true: &[usize], y_pred: &[usize], k: usize) -> Result<f64> {
        let report = multiclass_report(&confusion_matrix(y_true, y_pred, k)?)?;
        Ok(match self {
            FitnessMetric::Accuracy => report.accuracy,
            FitnessMetric::F1Micro => report.micro_f1,
            FitnessMetric::F1Macro => report.macro_f1,
        })
    }
}

/// Search parameters; defaults mirror the usual autoML budget of 100
/// generations x 100 individuals with a five-minute per-individual cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population_size: usize,
    pub generations: usize,
    pub eval_timeout_seconds: f64,
    pub metric: FitnessMetric,
    pub cv_folds: usize,
    pub seed: u64,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub max_transform_stages: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 100,
            generations: 100,
            eval_timeout_seconds: 300.0,
            metric: FitnessMetric::default(),
            cv_folds: 5,
            seed: 0,
            mutation_rate: 0.9,
            crossover_rate: 0.1,
            max_transform_stages: 3,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("population_size must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate)
            || !(0.0..=1.0).contains(&self.crossover_rate)
        {
            return Err(Error::Config("rates must lie in [0, 1]".into()));
        }
        if self.mutation_rate + self.crossover_rate > 1.0 {
            return Err(Error::Config(
                "mutation_rate + crossover_rate must not exceed 1".into(),
            ));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.max_transform_stages < 1 {
            return Err(Error::Config(
                "max_transform_stages must be at least 1".into(),
            ));
        }
        if self.eval_timeout_seconds.is_nan() || self.eval_timeout_seconds < 0.0 {
            return Err(Error::Config("eval_timeout_seconds must be >= 0".into()));
        }
        Ok(())
    }
}

/// Allowed values of one hyperparameter.
#[derive(Clone, Debug)]
pub enum ParamRange {
    Ints(Vec<i64>),
    Floats(Vec<f64>),
    Texts(Vec<&'static str>),
}

impl ParamRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> HyperValue {
        match self {
            ParamRange::Ints(grid) => HyperValue::Int(grid[rng.gen_range(0..grid.len())]),
            ParamRange::Floats(grid) => HyperValue::Float(grid[rng.gen_range(0..grid.len())]),
            ParamRange::Texts(grid) => {
                HyperValue::Text(grid[rng.gen_range(0..grid.len())].to_string())
            }
        }
    }

    fn contains(&self, value: &HyperValue) -> bool {
        match (self, value) {
            (ParamRange::Ints(grid), HyperValue::Int(v)) => grid.contains(v),
            (ParamRange::Floats(grid), HyperValue::Float(v)) => grid.contains(v),
            (ParamRange::Floats(grid), HyperValue::Int(v)) => grid.contains(&(*v as f64)),
            (ParamRange::Texts(grid), HyperValue::Text(v)) => grid.contains(&v.as_str()),
            _ => false,
        }
    }
}

/// One operator's searchable hyperparameters.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub kind: OpKind,
    pub params: Vec<(&'static str, ParamRange)>,
}

/// The finite operator/hyperparameter space the search draws from.
#[derive(Clone, Debug)]
pub struct OperatorRegistry {
    operators: Vec<OperatorSpec>,
}

impl OperatorRegistry {
    /// The standard operator grids (log-grid for C, integer grids for
    /// percentile and sizes).
    pub fn standard() -> OperatorRegistry {
        OperatorRegistry {
            operators: vec![
                OperatorSpec {
                    kind: OpKind::CountVectorize,
                    params: vec![("min_df", ParamRange::Ints(vec![1, 2, 3, 5, 10]))],
                },
                OperatorSpec {
                    kind: OpKind::SelectPercentile,
                    params: vec![("percentile", ParamRange::Ints((1..=100).collect()))],
                },
                OperatorSpec {
                    kind: OpKind::OneHot,
                    params: vec![("max_categories", ParamRange::Ints(vec![5, 10, 15, 20, 25]))],
                },
                OperatorSpec {
                    kind: OpKind::Rfe,
                    params: vec![
                        (
                            "target_ratio",
                            ParamRange::Floats(vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5]),
                        ),
                        ("step", ParamRange::Floats(vec![0.05, 0.1, 0.2])),
                        ("n_trees", ParamRange::Ints(vec![20, 50, 100])),
                    ],
                },
                OperatorSpec {
                    kind: OpKind::ExtraTreesClassifier,
                    params: vec![
                        ("n_trees", ParamRange::Ints(vec![20, 50, 100, 200])),
                        (
                            "max_features",
                            ParamRange::Texts(vec!["sqrt", "0.25", "0.5", "1.0"]),
                        ),
                        ("min_samples_split", ParamRange::Ints(vec![2, 5, 10, 20])),
                    ],
                },
                OperatorSpec {
                    kind: OpKind::LogisticRegression,
                    params: vec![(
                        "c",
                        ParamRange::Floats(vec![
                            1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 25.0,
                        ]),
                    )],
                },
            ],
        }
    }

    pub fn operator(&self, kind: OpKind) -> &OperatorSpec {
        self.operators
            .iter()
            .find(|op| op.kind == kind)
            .expect("every OpKind is registered")
    }

    /// Transform kinds insertable mid-chain (CountVectorize is fixed first).
    pub fn insertable_transforms(&self) -> Vec<OpKind> {
        self.operators
            .iter()
            .map(|op| op.kind)
            .filter(|k| k.role() == Role::Transform && *k != OpKind::CountVectorize)
            .collect()
    }

    pub fn classifiers(&self) -> Vec<OpKind> {
        self.operators
            .iter()
            .map(|op| op.kind)
            .filter(|k| k.role() == Role::Classifier)
            .collect()
    }

    /// New node of `kind` with every hyperparameter sampled from its grid.
    pub fn sample_node(&self, rng: &mut ChaCha8Rng, kind: OpKind) -> OperatorNode {
        let mut params = BTreeMap::new();
        for (name, range) in &self.operator(kind).params {
            params.insert(name.to_string(), range.sample(rng));
        }
        OperatorNode {
            kind,
            params,
            children: Vec::new(),
        }
    }

    /// Check one node's hyperparameters against the grids.
    pub fn validate_node(&self, node: &OperatorNode) -> Result<()> {
        let spec = self.operator(node.kind);
        for (key, value) in &node.params {
            let Some((_, range)) = spec.params.iter().find(|(name, _)| name == key) else {
                return Err(Error::Config(format!(
                    "{} has no hyperparameter {key:?}",
                    node.kind.name()
                )));
            };
            if !range.contains(value) {
                return Err(Error::Config(format!(
                    "{}.{key} value {value:?} outside its registry range",
                    node.kind.name()
                )));
            }
        }
        Ok(())
    }

    /// Check the full spec: chain shape plus every hyperparameter in range.
    pub fn validate_spec(&self, spec: &PipelineSpec) -> Result<()> {
        spec.validate_shape()?;
        for stage in spec.stages() {
            self.validate_node(stage)?;
        }
        Ok(())
    }
}

/// Evaluation outcome of a genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalStatus {
    Pending,
    Ok,
    Timeout,
    Error,
}

/// One individual: a spec plus cached evaluation state.
#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    pub spec: PipelineSpec,
    pub fitness: Option<f64>,
    pub eval_status: EvalStatus,
    /// Stage count, used as the selection tie-break (fewer is better).
    pub complexity: usize,
}

impl Genome {
    pub fn from_spec(spec: PipelineSpec) -> Genome {
        let complexity = spec.n_stages();
        Genome {
            spec,
            fitness: None,
            eval_status: EvalStatus::Pending,
            complexity,
        }
    }

    /// Canonical content key (hyperparameter maps are ordered, so equal
    /// specs serialize identically).
    pub fn canonical_key(&self) -> String {
        serde_json::to_string(&self.spec).expect("specs always serialize")
    }

    /// FNV-1a content hash; the "genome id" that seeds evaluation streams.
    pub fn id(&self) -> u64 {
        fnv1a64(self.canonical_key().as_bytes())
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Random valid genome: CountVectorize, up to `max_stages - 1` extra
/// transforms, then a random classifier root.
pub fn random_genome(
    rng: &mut ChaCha8Rng,
    registry: &OperatorRegistry,
    max_stages: usize,
) -> Genome {
    let n_extra = rng.gen_range(0..max_stages);
    let mut stages = vec![registry.sample_node(rng, OpKind::CountVectorize)];
    let transforms = registry.insertable_transforms();
    for _ in 0..n_extra {
        let kind = transforms[rng.gen_range(0..transforms.len())];
        stages.push(registry.sample_node(rng, kind));
    }
    let classifiers = registry.classifiers();
    let kind = classifiers[rng.gen_range(0..classifiers.len())];
    stages.push(registry.sample_node(rng, kind));
    Genome::from_spec(
        PipelineSpec::from_stages(stages, None).expect("generated chains are valid"),
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MutationKind {
    ResampleParam,
    InsertStage,
    DeleteStage,
    ReplaceNode,
}

/// One structural or hyperparameter mutation; the result always validates
/// and its fitness is cleared.
pub fn mutate(
    g: &Genome,
    rng: &mut ChaCha8Rng,
    registry: &OperatorRegistry,
    max_transform_stages: usize,
) -> Genome {
    let mut stages: Vec<OperatorNode> = g.spec.stages().into_iter().cloned().collect();
    let n_transforms = stages.len() - 1;

    let mut applicable = vec![MutationKind::ResampleParam, MutationKind::ReplaceNode];
    if n_transforms < max_transform_stages {
        applicable.push(MutationKind::InsertStage);
    }
    if n_transforms >= 2 {
        applicable.push(MutationKind::DeleteStage);
    }
    let choice = applicable[rng.gen_range(0..applicable.len())];

    match choice {
        MutationKind::ResampleParam => {
            // Uniform over every (stage, registry hyperparameter) slot.
            let slots: Vec<(usize, &'static str)> = stages
                .iter()
                .enumerate()
                .flat_map(|(i, stage)| {
                    registry
                        .operator(stage.kind)
                        .params
                        .iter()
                        .map(move |(name, _)| (i, *name))
                })
                .collect();
            if slots.is_empty() {
                // Unreachable with the standard registry; resample the
                // classifier as a whole instead.
                let kind = stages.last().unwrap().kind;
                *stages.last_mut().unwrap() = registry.sample_node(rng, kind);
            } else {
                let (stage_idx, key) = slots[rng.gen_range(0..slots.len())];
                let (_, range) = registry
                    .operator(stages[stage_idx].kind)
                    .params
                    .iter()
                    .find(|(name, _)| *name == key)
                    .unwrap();
                stages[stage_idx]
                    .params
                    .insert(key.to_string(), range.sample(rng));
            }
        }
        MutationKind::InsertStage => {
            let transforms = registry.insertable_transforms();
            let kind = transforms[rng.gen_range(0..transforms.len())];
            let node = registry.sample_node(rng, kind);
            // Anywhere after the vectorizer, before the classifier.
            let position = rng.gen_range(1..=n_transforms);
            stages.insert(position, node);
        }
        MutationKind::DeleteStage => {
            let position = rng.gen_range(1..n_transforms);
            stages.remove(position);
        }
        MutationKind::ReplaceNode => {
            // Replaceable: transforms after the vectorizer, plus the root.
            let n_choices = n_transforms; // positions 1..n_transforms and the classifier
            let pick = rng.gen_range(0..n_choices);
            if pick + 1 < n_transforms {
                let transforms = registry.insertable_transforms();
                let kind = transforms[rng.gen_range(0..transforms.len())];
                stages[pick + 1] = registry.sample_node(rng, kind);
            } else {
                let classifiers = registry.classifiers();
                let kind = classifiers[rng.gen_range(0..classifiers.len())];
                *stages.last_mut().unwrap() = registry.sample_node(rng, kind);
            }
        }
    }

    for stage in &mut stages {
        stage.children.clear();
    }
    Genome::from_spec(
        PipelineSpec::from_stages(stages, None).expect("mutations preserve validity"),
    )
}

/// Splice: the child keeps `a`'s classifier and takes `a`'s transform
/// prefix up to a random cut, then `b`'s suffix from the same cut.
pub fn crossover(a: &Genome, b: &Genome, rng: &mut ChaCha8Rng) -> Genome {
    let a_stages = a.spec.stages();
    let b_stages = b.spec.stages();
    let (a_root, a_transforms) = a_stages.split_last().unwrap();
    let (_, b_transforms) = b_stages.split_last().unwrap();
    let cut = rng.gen_range(1..=a_transforms.len().min(b_transforms.len()));
    let mut stages: Vec<OperatorNode> = Vec::new();
    stages.extend(a_transforms[..cut].iter().map(|&s| s.clone()));
    stages.extend(b_transforms[cut..].iter().map(|&s| s.clone()));
    stages.push((*a_root).clone());
    for stage in &mut stages {
        stage.children.clear();
    }
    Genome::from_spec(
        PipelineSpec::from_stages(stages, None).expect("splices preserve validity"),
    )
}

/// Per-fold fit seed: search seed, genome content hash and fold index mixed
/// into one stream id.
fn fold_seed(seed: u64, genome_id: u64, fold: usize) -> u64 {
    seed ^ genome_id ^ (fold as u64 + 1).wrapping_mul(0x517c_c1b7_2722_0a95)
}

/// Cross-validated fitness: refit every stage per fold, score the held-out
/// split, average. Timeouts and stage errors are captured in `eval_status`,
/// never raised.
pub fn evaluate_fitness(
    g: &Genome,
    ds: &Dataset,
    plan: &FoldPlan,
    metric: FitnessMetric,
    timeout_seconds: f64,
    seed: u64,
) -> Genome {
    let deadline = Deadline::after_seconds(timeout_seconds);
    let genome_id = g.id();
    let k = ds.n_classes();
    let mut scores = Vec::with_capacity(plan.folds().len());
    for (fold, (train, valid)) in plan.folds().iter().enumerate() {
        let outcome = (|| -> Result<f64> {
            let train_ds = ds.subset(train);
            let opts = FitOptions {
                seed: fold_seed(seed, genome_id, fold),
                deadline,
            };
            let fitted = fit_pipeline(&g.spec, &train_ds, &opts)?;
            let docs: Vec<String> = valid
                .iter()
                .map(|&i| ds.documents()[i].clone())
                .collect();
            let y_true: Vec<usize> = valid.iter().map(|&i| ds.labels()[i]).collect();
            let pred = predict_pipeline(&fitted, &docs, None)?;
            metric.score(&y_true, &pred.labels, k)
        })();
        match outcome {
            Ok(score) => scores.push(score),
            Err(e) => {
                let status = if matches!(e.root(), Error::Timeout) {
                    EvalStatus::Timeout
                } else {
                    EvalStatus::Error
                };
                return Genome {
                    spec: g.spec.clone(),
                    fitness: None,
                    eval_status: status,
                    complexity: g.complexity,
                };
            }
        }
    }
    let fitness = scores.iter().sum::<f64>() / scores.len() as f64;
    Genome {
        spec: g.spec.clone(),
        fitness: Some(fitness),
        eval_status: EvalStatus::Ok,
        complexity: g.complexity,
    }
}

/// One generation's summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_summary: String,
    pub elapsed_seconds: f64,
}

/// Full per-generation history of a search run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub generations: Vec<GenerationLog>,
}

impl SearchLog {
    pub fn best_fitness_sequence(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best_fitness).collect()
    }
}

/// Ordering for selection: fitness first, fewer stages on ties, then the
/// earlier individual.
fn better(a: &Genome, ai: usize, b: &Genome, bi: usize) -> bool {
    let fa = a.fitness.unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness.unwrap_or(f64::NEG_INFINITY);
    if fa != fb {
        return fa > fb;
    }
    if a.complexity != b.complexity {
        return a.complexity < b.complexity;
    }
    ai < bi
}

/// Run the generational search and refit the best spec on the full dataset.
pub fn run_search(cfg: &SearchConfig, ds: &Dataset) -> Result<(FittedPipeline, SearchLog)> {
    cfg.validate()?;
    if ds.n_present_classes() < 2 {
        return Err(Error::Domain(
            "search needs at least two classes present".into(),
        ));
    }
    if ds.len() < cfg.cv_folds * 2 {
        return Err(Error::Data(format!(
            "search needs at least {} rows for {}-fold evaluation, got {}",
            cfg.cv_folds * 2,
            cfg.cv_folds,
            ds.len()
        )));
    }
    let plan = stratified_kfold(ds, cfg.cv_folds, cfg.seed)?;
    let registry = OperatorRegistry::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Genome> = (0..cfg.population_size)
        .map(|_| random_genome(&mut rng, &registry, cfg.max_transform_stages))
        .collect();
    let mut cache: HashMap<String, (Option<f64>, EvalStatus)> = HashMap::new();
    let mut log = SearchLog::default();
    let started = Instant::now();
    let mut last_elapsed = 0.0;

    for generation in 0..cfg.generations {
        // Evaluate pending individuals, cache hits first, misses in parallel.
        let mut pending: Vec<usize> = Vec::new();
        for (i, genome) in population.iter_mut().enumerate() {
            if genome.eval_status != EvalStatus::Pending {
                continue;
            }
            if let Some(&(fitness, status)) = cache.get(&genome.canonical_key()) {
                genome.fitness = fitness;
                genome.eval_status = status;
            } else {
                pending.push(i);
            }
        }
        let evaluated: Vec<(usize, Genome)> = pending
            .par_iter()
            .map(|&i| {
                let g = evaluate_fitness(
                    &population[i],
                    ds,
                    &plan,
                    cfg.metric,
                    cfg.eval_timeout_seconds,
                    cfg.seed,
                );
                (i, g)
            })
            .collect();
        for (i, genome) in evaluated {
            cache.insert(genome.canonical_key(), (genome.fitness, genome.eval_status));
            population[i] = genome;
        }

        let selectable: Vec<usize> = (0..population.len())
            .filter(|&i| population[i].eval_status == EvalStatus::Ok)
            .collect();
        if selectable.is_empty() {
            return Err(Error::Search(format!(
                "no individual evaluated successfully in generation {generation}"
            )));
        }

        let best_idx = selectable
            .iter()
            .copied()
            .reduce(|best, i| {
                if better(&population[i], i, &population[best], best) {
                    i
                } else {
                    best
                }
            })
            .unwrap();
        let mean = selectable
            .iter()
            .map(|&i| population[i].fitness.unwrap())
            .sum::<f64>()
            / selectable.len() as f64;
        let elapsed = started.elapsed().as_secs_f64();
        log.generations.push(GenerationLog {
            generation,
            best_fitness: population[best_idx].fitness.unwrap(),
            mean_fitness: mean,
            best_summary: population[best_idx].spec.summary(),
            elapsed_seconds: elapsed - last_elapsed,
        });
        last_elapsed = elapsed;

        if generation + 1 == cfg.generations {
            break;
        }

        // Breed the next generation: elite first, then tournament offspring.
        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut winner = selectable[rng.gen_range(0..selectable.len())];
            for _ in 1..3 {
                let challenger = selectable[rng.gen_range(0..selectable.len())];
                if better(&population[challenger], challenger, &population[winner], winner) {
                    winner = challenger;
                }
            }
            winner
        };
        let mut next = Vec::with_capacity(cfg.population_size);
        next.push(population[best_idx].clone());
        while next.len() < cfg.population_size {
            let roll: f64 = rng.gen();
            if roll < cfg.crossover_rate {
                let a = tournament(&mut rng);
                let b = tournament(&mut rng);
                next.push(crossover(&population[a], &population[b], &mut rng));
            } else if roll < cfg.crossover_rate + cfg.mutation_rate {
                let parent = tournament(&mut rng);
                next.push(mutate(
                    &population[parent],
                    &mut rng,
                    &registry,
                    cfg.max_transform_stages,
                ));
            } else {
                let parent = tournament(&mut rng);
                next.push(population[parent].clone());
            }
        }
        population = next;
    }

    let last = log.generations.last().unwrap();
    let best = population
        .iter()
        .enumerate()
        .filter(|(_, g)| g.eval_status == EvalStatus::Ok)
        .reduce(|(bi, bg), (i, g)| if better(g, i, bg, bi) { (i, g) } else { (bi, bg) })
        .map(|(_, g)| g.clone())
        .expect("final generation has the elite");
    debug_assert_eq!(best.fitness.unwrap(), last.best_fitness);

    let opts = FitOptions {
        seed: cfg.seed ^ best.id(),
        deadline: Deadline::NONE,
    };
    let fitted = fit_pipeline(&best.spec, ds, &opts)?;
    Ok((fitted, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::preset;
    use crate::synth;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn presets_validate_against_the_registry() {
        let registry = OperatorRegistry::standard();
        registry.validate_spec(&preset("subtask1").unwrap()).unwrap();
        registry.validate_spec(&preset("subtask2").unwrap()).unwrap();
    }

    #[test]
    fn registry_rejects_out_of_grid_values() {
        let registry = OperatorRegistry::standard();
        let node = OperatorNode::new(OpKind::LogisticRegression).with_float("c", 0.333);
        assert!(registry.validate_node(&node).is_err());
        let node = OperatorNode::new(OpKind::SelectPercentile).with_int("percentile", 0);
        assert!(registry.validate_node(&node).is_err());
        let node = OperatorNode::new(OpKind::CountVectorize).with_int("bogus", 1);
        assert!(registry.validate_node(&node).is_err());
    }

    #[test]
    fn minimal_random_genome_is_vectorizer_plus_classifier() {
        let registry = OperatorRegistry::standard();
        for seed in 0..20 {
            let g = random_genome(&mut rng(seed), &registry, 1);
            let stages = g.spec.stages();
            assert_eq!(stages.len(), 2);
            assert_eq!(stages[0].kind, OpKind::CountVectorize);
            assert_eq!(stages[1].kind.role(), Role::Classifier);
        }
    }

    #[test]
    fn random_genomes_always_validate() {
        let registry = OperatorRegistry::standard();
        let mut r = rng(7);
        for _ in 0..1000 {
            let g = random_genome(&mut r, &registry, 3);
            registry.validate_spec(&g.spec).unwrap();
            assert_eq!(g.eval_status, EvalStatus::Pending);
            assert!(g.fitness.is_none());
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let registry = OperatorRegistry::standard();
        let a: Vec<String> = (0..30)
            .scan(rng(55), |r, _| {
                Some(random_genome(r, &registry, 3).canonical_key())
            })
            .collect();
        let b: Vec<String> = (0..30)
            .scan(rng(55), |r, _| {
                Some(random_genome(r, &registry, 3).canonical_key())
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn mutation_respects_stage_cap_and_closure() {
        let registry = OperatorRegistry::standard();
        let mut r = rng(3);
        let mut g = random_genome(&mut r, &registry, 3);
        for _ in 0..500 {
            g = mutate(&g, &mut r, &registry, 3);
            registry.validate_spec(&g.spec).unwrap();
            assert!(g.spec.n_transforms() <= 3);
            assert!(g.fitness.is_none(), "mutation clears fitness");
        }
    }

    #[test]
    fn mutation_at_max_stages_never_inserts() {
        let registry = OperatorRegistry::standard();
        let mut r = rng(8);
        // Build a genome already at the cap.
        let mut g = random_genome(&mut r, &registry, 1);
        while g.spec.n_transforms() < 3 {
            g = mutate(&g, &mut r, &registry, 3);
        }
        for _ in 0..200 {
            g = mutate(&g, &mut r, &registry, 3);
            assert!(g.spec.n_transforms() <= 3);
        }
    }

    #[test]
    fn mutation_is_seed_deterministic() {
        let registry = OperatorRegistry::standard();
        let g = random_genome(&mut rng(1), &registry, 3);
        let a = mutate(&g, &mut rng(42), &registry, 3);
        let b = mutate(&g, &mut rng(42), &registry, 3);
        assert_eq!(a.canonical_key(), b.canonical_key());
    }

    #[test]
    fn self_crossover_is_identity() {
        let registry = OperatorRegistry::standard();
        for seed in 0..20 {
            let g = random_genome(&mut rng(seed), &registry, 3);
            let child = crossover(&g, &g, &mut rng(seed + 100));
            assert_eq!(child.canonical_key(), g.canonical_key());
        }
    }

    #[test]
    fn crossover_respects_cap_and_validates() {
        let registry = OperatorRegistry::standard();
        let mut r = rng(12);
        for _ in 0..300 {
            let a = random_genome(&mut r, &registry, 3);
            let b = random_genome(&mut r, &registry, 3);
            let child = crossover(&a, &b, &mut r);
            registry.validate_spec(&child.spec).unwrap();
            assert!(child.spec.n_transforms() <= 3);
            // The child keeps a's classifier.
            assert_eq!(
                child.spec.stages().last().unwrap().kind,
                a.spec.stages().last().unwrap().kind
            );
        }
    }

    #[test]
    fn operator_closure_over_many_seeded_operations() {
        let registry = OperatorRegistry::standard();
        let mut r = rng(99);
        let mut pool: Vec<Genome> = (0..10)
            .map(|_| random_genome(&mut r, &registry, 3))
            .collect();
        for step in 0..10_000 {
            let g = match step % 3 {
                0 => random_genome(&mut r, &registry, 3),
                1 => {
                    let i = r.gen_range(0..pool.len());
                    mutate(&pool[i], &mut r, &registry, 3)
                }
                _ => {
                    let i = r.gen_range(0..pool.len());
                    let j = r.gen_range(0..pool.len());
                    crossover(&pool[i], &pool[j], &mut r)
                }
            };
            registry.validate_spec(&g.spec).unwrap();
            let slot = r.gen_range(0..pool.len());
            pool[slot] = g;
        }
    }

    fn bare_logistic_genome() -> Genome {
        Genome::from_spec(
            PipelineSpec::from_stages(
                vec![
                    OperatorNode::new(OpKind::CountVectorize).with_int("min_df", 1),
                    OperatorNode::new(OpKind::LogisticRegression).with_float("c", 1.0),
                ],
                None,
            )
            .unwrap(),
        )
    }

    #[test]
    fn separable_corpus_scores_high() {
        let ds = synth::binary_corpus(60, 4);
        let plan = stratified_kfold(&ds, 5, 0).unwrap();
        let g = evaluate_fitness(
            &bare_logistic_genome(),
            &ds,
            &plan,
            FitnessMetric::Accuracy,
            300.0,
            0,
        );
        assert_eq!(g.eval_status, EvalStatus::Ok);
        assert!(g.fitness.unwrap() >= 0.95, "fitness {:?}", g.fitness);
    }

    #[test]
    fn zero_timeout_marks_timeout() {
        let ds = synth::binary_corpus(20, 4);
        let plan = stratified_kfold(&ds, 2, 0).unwrap();
        let g = evaluate_fitness(
            &bare_logistic_genome(),
            &ds,
            &plan,
            FitnessMetric::Accuracy,
            0.0,
            0,
        );
        assert_eq!(g.eval_status, EvalStatus::Timeout);
        assert!(g.fitness.is_none());
    }

    #[test]
    fn fitness_is_deterministic() {
        let ds = synth::binary_corpus(40, 17);
        let plan = stratified_kfold(&ds, 4, 9).unwrap();
        let g = bare_logistic_genome();
        let a = evaluate_fitness(&g, &ds, &plan, FitnessMetric::F1Macro, 300.0, 5);
        let b = evaluate_fitness(&g, &ds, &plan, FitnessMetric::F1Macro, 300.0, 5);
        assert_eq!(a.fitness, b.fitness);
    }

    #[test]
    fn search_log_is_monotone_and_reproducible() {
        let ds = synth::binary_corpus(50, 23);
        let cfg = SearchConfig {
            population_size: 8,
            generations: 4,
            cv_folds: 3,
            seed: 11,
            ..SearchConfig::default()
        };
        let (fitted_a, log_a) = run_search(&cfg, &ds).unwrap();
        let (fitted_b, log_b) = run_search(&cfg, &ds).unwrap();
        let seq = log_a.best_fitness_sequence();
        for pair in seq.windows(2) {
            assert!(pair[1] >= pair[0], "elitism keeps best fitness monotone");
        }
        assert_eq!(fitted_a.spec, fitted_b.spec);
        assert_eq!(seq, log_b.best_fitness_sequence());
        assert_eq!(
            log_a.generations.iter().map(|g| &g.best_summary).collect::<Vec<_>>(),
            log_b.generations.iter().map(|g| &g.best_summary).collect::<Vec<_>>()
        );
    }

    #[test]
    fn all_failures_in_generation_zero_is_search_error() {
        let ds = synth::binary_corpus(30, 2);
        let cfg = SearchConfig {
            population_size: 4,
            generations: 2,
            cv_folds: 2,
            eval_timeout_seconds: 0.0,
            ..SearchConfig::default()
        };
        assert!(matches!(run_search(&cfg, &ds), Err(Error::Search(_))));
    }

    #[test]
    fn search_rejects_tiny_datasets() {
        let ds = synth::binary_corpus(6, 2);
        let cfg = SearchConfig {
            population_size: 4,
            generations: 1,
            cv_folds: 5,
            ..SearchConfig::default()
        };
        assert!(matches!(run_search(&cfg, &ds), Err(Error::Data(_))));
    }

    #[test]
    fn config_validation_catches_bad_rates() {
        let cfg = SearchConfig {
            mutation_rate: 0.8,
            crossover_rate: 0.3,
            ..SearchConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
