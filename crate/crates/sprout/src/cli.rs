//! Command-line front end: train/predict/evaluate/search/replicate.
//!
//! Every successful run prints its fully resolved configuration (defaulted
//! seeds included) on a single `config:` line, so any output can be
//! reproduced from the printed invocation. Exit codes: 0 success, 2 usage,
//! 3 data/format problems, 4 numeric errors or timeouts.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::corpus::{infer_label_names, load_corpus, read_documents, Dataset};
use crate::error::{Error, Result};
use crate::evolve::{run_search, FitnessMetric, SearchConfig};
use crate::metrics::{binary_report, confusion_matrix, multiclass_report};
use crate::pipeline::{
    deserialize_pipeline, fit_pipeline, predict_pipeline, preset, serialize_pipeline, FitOptions,
    FittedPipeline, FittedState, HyperValue,
};

#[derive(Parser)]
#[command(
    name = "sprout",
    version,
    about = "Shallow text-classification pipelines with evolutionary search"
)]
struct Cli {
    /// Worker threads for fitting and search (default: all cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    /// Aligned human-readable table.
    #[default]
    Text,
    /// Machine-readable key=value lines.
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a preset pipeline and write the model document.
    Train {
        /// Preset name: subtask1 or subtask2.
        #[arg(long)]
        preset: String,
        /// Document file, one document per line.
        #[arg(long)]
        text: PathBuf,
        /// Tag file, one tag per line.
        #[arg(long)]
        labels: PathBuf,
        /// Where to write the pipeline document.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated tag vocabulary; inferred from the tag file when omitted.
        #[arg(long)]
        label_names: Option<String>,
        /// Override the vectorizer's minimum document frequency.
        #[arg(long)]
        min_df: Option<i64>,
    },
    /// Predict tags for a document file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: PathBuf,
        /// Positive-class probability cutoff (binary models only).
        #[arg(long)]
        threshold: Option<f64>,
        /// Output file, one predicted tag per line.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model against a labeled file and print the report.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Evolve a pipeline with cross-validated fitness.
    Search {
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the per-generation search log (JSON).
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 100)]
        population: usize,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        /// Per-individual evaluation budget in seconds.
        #[arg(long, default_value_t = 300.0)]
        timeout: f64,
        /// Fitness metric: accuracy, f1_micro or f1_macro.
        #[arg(long, default_value = "accuracy")]
        metric: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        label_names: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_stages: usize,
        #[arg(long, default_value_t = 0.9)]
        mutation_rate: f64,
        #[arg(long, default_value_t = 0.1)]
        crossover_rate: f64,
    },
    /// Fit a preset on a train split and print test metrics.
    Replicate {
        /// 1 (binary preset), 2 (multiclass preset) or transfer
        /// (multiclass preset fitted on binary labels).
        #[arg(long)]
        task: String,
        #[arg(long)]
        train_text: PathBuf,
        #[arg(long)]
        train_labels: PathBuf,
        #[arg(long)]
        test_text: PathBuf,
        #[arg(long)]
        test_labels: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        label_names: Option<String>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
}

/// Parse arguments, set up the thread pool, dispatch, map errors to codes.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: could not build thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command, threads)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => 2,
        Error::Numeric(_) | Error::Timeout => 4,
        _ => 3,
    }
}

fn threads_label(threads: usize) -> String {
    if threads == 0 {
        "all".to_string()
    } else {
        threads.to_string()
    }
}

fn resolve_label_names(flag: &Option<String>, tag_files: &[&Path]) -> Result<Vec<String>> {
    match flag {
        Some(list) => Ok(list.split(',').map(|s| s.trim().to_string()).collect()),
        None => infer_label_names(tag_files),
    }
}

fn load_model(path: &Path) -> Result<FittedPipeline> {
    deserialize_pipeline(&fs::read_to_string(path)?)
}

fn warn_on_nonconvergence(fp: &FittedPipeline) {
    for state in &fp.states {
        if let FittedState::Logistic(model) = state {
            if !model.converged {
                eprintln!(
                    "warning: logistic solver stopped at max_iter before reaching tol; \
                     results may be slightly off the optimum"
                );
            }
        }
    }
}

fn dispatch(command: Command, threads: usize) -> Result<()> {
    match command {
        Command::Train {
            preset: preset_name,
            text,
            labels,
            out,
            seed,
            label_names,
            min_df,
        } => {
            let names = resolve_label_names(&label_names, &[labels.as_path()])?;
            let ds = load_corpus(&text, &labels, &names)?;
            let mut spec = preset(&preset_name)?;
            if let Some(df) = min_df {
                // The vectorizer is the deepest node of the chain.
                let mut node = &mut spec.root;
                while !node.children.is_empty() {
                    node = &mut node.children[0];
                }
                node.params.insert("min_df".into(), HyperValue::Int(df));
            }
            println!(
                "config: subcommand=train preset={preset_name} text={} labels={} out={} \
                 seed={seed} threads={} label_names={} min_df={}",
                text.display(),
                labels.display(),
                out.display(),
                threads_label(threads),
                names.join(","),
                min_df.map_or("default".into(), |v| v.to_string()),
            );
            let fitted = fit_pipeline(&spec, &ds, &FitOptions::with_seed(seed))?;
            warn_on_nonconvergence(&fitted);
            fs::write(&out, serialize_pipeline(&fitted)?)?;
            println!("trained {} on {} documents -> {}", spec.summary(), ds.len(), out.display());
            Ok(())
        }
        Command::Predict {
            model,
            text,
            threshold,
            out,
        } => {
            let fp = load_model(&model)?;
            let docs = read_documents(&text)?;
            println!(
                "config: subcommand=predict model={} text={} out={} threshold={} threads={}",
                model.display(),
                text.display(),
                out.display(),
                threshold.map_or("argmax".into(), |t| t.to_string()),
                threads_label(threads),
            );
            let pred = predict_pipeline(&fp, &docs, threshold)?;
            let mut lines = String::new();
            for &label in &pred.labels {
                lines.push_str(&fp.label_names[label]);
                lines.push('\n');
            }
            fs::write(&out, lines)?;
            println!("wrote {} predictions -> {}", pred.labels.len(), out.display());
            Ok(())
        }
        Command::Evaluate {
            model,
            text,
            labels,
            threshold,
            format,
        } => {
            let fp = load_model(&model)?;
            let ds = load_corpus(&text, &labels, &fp.label_names)?;
            println!(
                "config: subcommand=evaluate model={} text={} labels={} threshold={} \
                 threads={} format={format:?}",
                model.display(),
                text.display(),
                labels.display(),
                threshold.map_or("argmax".into(), |t| t.to_string()),
                threads_label(threads),
            );
            let pred = predict_pipeline(&fp, ds.documents(), threshold)?;
            print_report(&ds, &pred.labels, format, "")?;
            Ok(())
        }
        Command::Search {
            text,
            labels,
            out,
            log,
            population,
            generations,
            timeout,
            metric,
            folds,
            seed,
            label_names,
            max_stages,
            mutation_rate,
            crossover_rate,
        } => {
            let names = resolve_label_names(&label_names, &[labels.as_path()])?;
            let ds = load_corpus(&text, &labels, &names)?;
            let cfg = SearchConfig {
                population_size: population,
                generations,
                eval_timeout_seconds: timeout,
                metric: FitnessMetric::parse(&metric)?,
                cv_folds: folds,
                seed,
                mutation_rate,
                crossover_rate,
                max_transform_stages: max_stages,
            };
            println!(
                "config: subcommand=search text={} labels={} out={} log={} population={population} \
                 generations={generations} timeout={timeout} metric={} folds={folds} seed={seed} \
                 mutation_rate={mutation_rate} crossover_rate={crossover_rate} \
                 max_stages={max_stages} threads={} label_names={}",
                text.display(),
                labels.display(),
                out.display(),
                log.display(),
                cfg.metric.name(),
                threads_label(threads),
                names.join(","),
            );
            let (fitted, search_log) = run_search(&cfg, &ds)?;
            for entry in &search_log.generations {
                println!(
                    "generation {:>3}: best {:.4} mean {:.4}  {}",
                    entry.generation, entry.best_fitness, entry.mean_fitness, entry.best_summary
                );
            }
            fs::write(&out, serialize_pipeline(&fitted)?)?;
            let log_doc = serde_json::to_string_pretty(&search_log)
                .map_err(|e| Error::Format(e.to_string()))?;
            fs::write(&log, log_doc)?;
            println!(
                "best pipeline: {} -> {} (log: {})",
                fitted.spec.summary(),
                out.display(),
                log.display()
            );
            Ok(())
        }
        Command::Replicate {
            task,
            train_text,
            train_labels,
            test_text,
            test_labels,
            seed,
            label_names,
            format,
        } => {
            let preset_name = match task.as_str() {
                "1" => "subtask1",
                // Transfer = the multiclass-winning spec refit on binary labels.
                "2" | "transfer" => "subtask2",
                other => {
                    return Err(Error::Config(format!(
                        "unknown task {other:?}; expected 1, 2 or transfer"
                    )))
                }
            };
            let names = resolve_label_names(
                &label_names,
                &[train_labels.as_path(), test_labels.as_path()],
            )?;
            let train = load_corpus(&train_text, &train_labels, &names)?;
            let test = load_corpus(&test_text, &test_labels, &names)?;
            println!(
                "config: subcommand=replicate task={task} preset={preset_name} train_text={} \
                 train_labels={} test_text={} test_labels={} seed={seed} threads={} \
                 label_names={} format={format:?}",
                train_text.display(),
                train_labels.display(),
                test_text.display(),
                test_labels.display(),
                threads_label(threads),
                names.join(","),
            );
            let spec = preset(preset_name)?;
            let fitted = fit_pipeline(&spec, &train, &FitOptions::with_seed(seed))?;
            warn_on_nonconvergence(&fitted);
            if names.len() == 2 {
                // Binary tasks report the default cut and the lowered one.
                for threshold in [0.5, 0.007] {
                    let pred = predict_pipeline(&fitted, test.documents(), Some(threshold))?;
                    match format {
                        ReportFormat::Text => println!("threshold {threshold}"),
                        ReportFormat::Kv => {}
                    }
                    print_report(&test, &pred.labels, format, &format!("t{threshold}."))?;
                }
            } else {
                let pred = predict_pipeline(&fitted, test.documents(), None)?;
                print_report(&test, &pred.labels, format, "")?;
            }
            Ok(())
        }
    }
}

fn print_report(
    ds: &Dataset,
    predicted: &[usize],
    format: ReportFormat,
    prefix: &str,
) -> Result<()> {
    let k = ds.n_classes();
    let cm = confusion_matrix(ds.labels(), predicted, k)?;
    let rendered = if k == 2 {
        let report = binary_report(&cm)?;
        match format {
            ReportFormat::Text => report.render_text(),
            ReportFormat::Kv => report.render_kv(prefix),
        }
    } else {
        let report = multiclass_report(&cm)?;
        match format {
            ReportFormat::Text => report.render_text(),
            ReportFormat::Kv => report.render_kv(prefix),
        }
    };
    print!("{rendered}");
    Ok(())
}
