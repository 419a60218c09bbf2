//! The four subcommands as library functions returning structured results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use catex_core::dataset::{self, split_indices, DatasetManifest, SplitSpec, SynthParams};
use catex_core::formal::{self, VerificationReport};
use catex_core::learn::{
    evaluate, select_components_with, stratified_folds, Classifier, ConfusionMatrix, Pipeline,
};
use catex_core::{extract, load_image, CatexConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::features::{self, FeatureRow, FeatureSet};

/// Extracts one descriptor row per manifest entry, in manifest order.
///
/// `jobs = 0` uses one worker per core. The first failing image aborts the
/// run and is named in the error.
pub fn extract_manifest(
    manifest: &DatasetManifest,
    config: &CatexConfig,
    jobs: usize,
    progress: bool,
) -> Result<FeatureSet> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let done = AtomicUsize::new(0);
    let total = manifest.len();
    let rows: Vec<FeatureRow> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let fail = |source| CliError::Extraction {
                    path: entry.path.clone(),
                    source,
                };
                let image = load_image(&entry.path).map_err(fail)?;
                let descriptor = extract(&image, config).map_err(fail)?;
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if progress && (n.is_multiple_of(10) || n == total) {
                    eprintln!("extracted {n}/{total}");
                }
                Ok(FeatureRow {
                    path: entry.path.display().to_string(),
                    label: entry.label.clone(),
                    sample_tag: entry.sample_tag.clone(),
                    values: descriptor.into_values(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(FeatureSet::new(config.clone(), rows))
}

pub fn cmd_extract(
    manifest_path: &Path,
    config: &CatexConfig,
    output: &Path,
    jobs: usize,
    progress: bool,
) -> Result<FeatureSet> {
    let manifest = dataset::load_manifest(manifest_path)?;
    let set = extract_manifest(&manifest, config, jobs, progress)?;
    features::write(&set, output)?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub split: SplitSpec,
    pub pca_grid: Vec<usize>,
    pub folds: usize,
    pub classifier: Classifier,
    /// Single round that trains and tests on every row (diagnostic only).
    pub train_on_test: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub components: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub rounds: Vec<RoundResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation across rounds (0 for a single round).
    pub std_accuracy: f64,
    /// Sum of the per-round confusion matrices.
    pub confusion: ConfusionMatrix,
    /// Pipeline fitted in the last round.
    pub model: Pipeline,
}

/// Candidate counts clamped to what every cross-validation fold can fit.
fn feasible_grid(
    grid: &[usize],
    labels: &[&str],
    dim: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let assignment = stratified_folds(labels, folds, seed)?;
    let smallest_train = (0..folds)
        .map(|f| assignment.iter().filter(|&&a| a != f).count())
        .min()
        .unwrap_or(0);
    let cap = smallest_train.saturating_sub(1).min(dim);
    if cap == 0 {
        return Err(catex_core::Error::Validation(
            "training folds are too small for any principal component".into(),
        )
        .into());
    }
    let mut out: Vec<usize> = grid.iter().map(|&k| k.min(cap)).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Runs the split protocol: per round, choose the number of components by
/// cross-validation on the training rows, fit PCA and the classifier on
/// them, and score the test rows.
pub fn evaluate_features(set: &FeatureSet, opts: &EvaluateOptions) -> Result<EvaluationReport> {
    let labels = set.labels();
    let samples = set.samples();
    let dim = set.layout().len();
    let splits = if opts.train_on_test {
        let all: Vec<usize> = (0..set.rows.len()).collect();
        vec![dataset::Split {
            train: all.clone(),
            test: all,
        }]
    } else {
        split_indices(&labels, set.sample_tags().as_deref(), &opts.split)?
    };

    let mut rounds = Vec::with_capacity(splits.len());
    let mut model = None;
    for (round, split) in splits.iter().enumerate() {
        let seed = opts.split.seed.wrapping_add(round as u64);
        let xs: Vec<Vec<f64>> = split.train.iter().map(|&i| samples[i].clone()).collect();
        let ys: Vec<&str> = split.train.iter().map(|&i| labels[i]).collect();
        let grid = feasible_grid(&opts.pca_grid, &ys, dim, opts.folds, seed)?;
        let k = select_components_with(opts.classifier, &xs, &ys, &grid, opts.folds, seed)?;
        let pipeline = Pipeline::fit(&xs, &ys, k, opts.classifier)?;
        let predictions = split
            .test
            .iter()
            .map(|&i| pipeline.predict(&samples[i]))
            .collect::<catex_core::Result<Vec<_>>>()?;
        let truths: Vec<&str> = split.test.iter().map(|&i| labels[i]).collect();
        let (confusion, accuracy) = evaluate(&predictions, &truths)?;
        rounds.push(RoundResult {
            components: k,
            train_size: split.train.len(),
            test_size: split.test.len(),
            accuracy,
            confusion,
        });
        model = Some(pipeline);
    }

    let n = rounds.len() as f64;
    let mean = rounds.iter().map(|r| r.accuracy).sum::<f64>() / n;
    let std = if rounds.len() > 1 {
        (rounds.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut confusion = rounds[0].confusion.clone();
    for r in &rounds[1..] {
        confusion.merge(&r.confusion);
    }
    Ok(EvaluationReport {
        rounds,
        mean_accuracy: mean,
        std_accuracy: std,
        confusion,
        model: model.expect("at least one round"),
    })
}

pub fn format_report(report: &EvaluationReport, opts: &EvaluateOptions) -> String {
    let mut out = String::new();
    let protocol = if opts.train_on_test {
        "train-on-test".to_owned()
    } else {
        opts.split.protocol.to_string()
    };
    let classifier = match opts.classifier {
        Classifier::Lda => "lda",
        Classifier::Knn => "knn",
    };
    let _ = writeln!(out, "protocol: {protocol}, classifier: {classifier}, folds: {}", opts.folds);
    for (i, r) in report.rounds.iter().enumerate() {
        let _ = writeln!(
            out,
            "round {}: accuracy {:.4} ({} train, {} test, {} components)",
            i + 1,
            r.accuracy,
            r.train_size,
            r.test_size,
            r.components
        );
    }
    let _ = writeln!(
        out,
        "mean accuracy: {:.4} +/- {:.4} over {} rounds",
        report.mean_accuracy,
        report.std_accuracy,
        report.rounds.len()
    );
    let _ = writeln!(
        out,
        "aggregate confusion: {} of {} correct ({:.4})",
        report.confusion.trace(),
        report.confusion.total(),
        report.confusion.accuracy()
    );
    out
}

/// Comma-separated counts with the labels as header row and first column.
pub fn confusion_to_csv(cm: &ConfusionMatrix) -> String {
    let mut out = String::from("truth\\predicted");
    for l in cm.labels() {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (label, row) in cm.labels().iter().zip(cm.counts()) {
        out.push_str(label);
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

/// Serialized pipeline together with the extraction settings it expects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub extraction: CatexConfig,
    pub pipeline: Pipeline,
}

pub const MODEL_FORMAT: &str = "catex-model";
pub const MODEL_VERSION: u32 = 1;

pub fn save_model(path: &Path, extraction: &CatexConfig, pipeline: &Pipeline) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_owned(),
        version: MODEL_VERSION,
        extraction: extraction.clone(),
        pipeline: pipeline.clone(),
    };
    let text = serde_json::to_string(&file).expect("model is serializable");
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |message: String| CliError::FeatureFile {
        path: path.to_path_buf(),
        message,
    };
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
        return Err(bad(format!(
            "unsupported model container {} v{}",
            file.format, file.version
        )));
    }
    Ok(file)
}

pub fn cmd_evaluate(
    features_path: &Path,
    opts: &EvaluateOptions,
    confusion_output: Option<&Path>,
    model_output: Option<&Path>,
) -> Result<EvaluationReport> {
    let set = features::read(features_path)?;
    let report = evaluate_features(&set, opts)?;
    if let Some(path) = confusion_output {
        fs::write(path, confusion_to_csv(&report.confusion)).map_err(|e| CliError::io(path, e))?;
    }
    if let Some(path) = model_output {
        save_model(path, &set.config, &report.model)?;
    }
    Ok(report)
}

/// Output of `synth`: the manifest plus any warnings about the settings.
#[derive(Debug, Clone)]
pub struct SynthOutcome {
    pub manifest: DatasetManifest,
    pub warnings: Vec<String>,
}

pub fn cmd_synth(
    classes: usize,
    per_class: usize,
    size: usize,
    seed: u64,
    params: &SynthParams,
    out_dir: &Path,
) -> Result<SynthOutcome> {
    let mut warnings = Vec::new();
    let min = CatexConfig::default().min_image_size();
    if size < min {
        warnings.push(format!(
            "images of size {size} are smaller than {min}; extraction with the default schedule will fail"
        ));
    }
    let manifest =
        dataset::generate_synthetic_with(classes, per_class, size, seed, params, out_dir)?;
    Ok(SynthOutcome { manifest, warnings })
}

pub fn cmd_verify_lemmas(max_value: i64, length: usize) -> Result<Vec<VerificationReport>> {
    Ok(formal::verify_all(max_value, length)?)
}

/// Error when any report recorded a violation.
pub fn check_reports(reports: &[VerificationReport]) -> Result<()> {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}
