use std::path::PathBuf;
use std::process::ExitCode;

use catex_cli::commands::{self, EvaluateOptions};
use catex_cli::config::{self, RunConfig, DEFAULT_FOLDS};
use catex_cli::{CliError, Result};
use catex_core::catex::{DEFAULT_ALPHA, DEFAULT_ITERATIONS};
use catex_core::dataset::{Protocol, SplitSpec, SynthParams, DEFAULT_ROUNDS};
use catex_core::learn::Classifier;
use catex_core::LbpConfig;
use clap::{Args, Parser, Subcommand};

/// Cellular-automaton LBP texture descriptors: extraction, evaluation,
/// synthetic data and lemma verification.
#[derive(Debug, Parser)]
#[command(name = "catex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract descriptors for every image of a manifest.
    Extract(ExtractArgs),
    /// Cross-validated PCA + classifier evaluation of a feature file.
    Evaluate(EvaluateArgs),
    /// Write a synthetic grating dataset and its manifest.
    Synth(SynthArgs),
    /// Exhaustively check the 1-D operator lemmas.
    VerifyLemmas(VerifyArgs),
}

#[derive(Debug, Clone)]
struct Schedule(Vec<LbpConfig>);

#[derive(Debug, Clone)]
struct Grid(Vec<usize>);

fn parse_schedule(s: &str) -> std::result::Result<Schedule, String> {
    config::parse_schedule(s).map(Schedule).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    config::parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn parse_classifier(s: &str) -> std::result::Result<Classifier, String> {
    config::parse_classifier(s).map_err(|e| e.to_string())
}

fn parse_protocol(s: &str) -> std::result::Result<Protocol, String> {
    s.parse().map_err(|e: catex_core::Error| e.to_string())
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Manifest listing `path<TAB>label[<TAB>sample_tag]` entries.
    manifest: PathBuf,
    /// Feature file to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Comma-separated `p:r` neighborhoods.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "CATEX_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Feature file produced by `extract`.
    features: PathBuf,
    #[arg(long, value_parser = parse_protocol, default_value = "random-half")]
    protocol: Protocol,
    /// Rounds (default 10 for random-half, every sample tag for sample-holdout).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate numbers of principal components.
    #[arg(long, value_parser = parse_grid)]
    pca_grid: Option<Grid>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, value_parser = parse_classifier, default_value = "lda")]
    classifier: Classifier,
    /// Where to write the aggregate confusion matrix (CSV).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the last round's fitted model (JSON).
    #[arg(long)]
    model_output: Option<PathBuf>,
    /// Diagnostic: one round that trains and tests on every row.
    #[arg(long)]
    train_on_test: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for images and `manifest.tsv`.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of the additive noise.
    #[arg(long, default_value_t = SynthParams::default().noise)]
    noise: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 10)]
    max_value: i64,
    #[arg(long, default_value_t = 3)]
    length: usize,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => {
            let run = RunConfig {
                alpha: a.alpha,
                iterations: a.iterations,
                schedule: a.schedule.map_or_else(catex_core::default_schedule, |s| s.0),
                ..RunConfig::default()
            };
            let set = commands::cmd_extract(&a.manifest, &run.catex()?, &a.output, a.jobs, !a.quiet)?;
            println!(
                "wrote {} rows x {} values to {}",
                set.rows.len(),
                set.layout().len(),
                a.output.display()
            );
        }
        Command::Evaluate(a) => {
            let defaults = RunConfig::default();
            let rounds = match (a.rounds, a.protocol) {
                (Some(r), _) => r,
                (None, Protocol::RandomHalf) => DEFAULT_ROUNDS,
                (None, Protocol::SampleHoldout) => {
                    let set = catex_cli::features::read(&a.features)?;
                    let tags = set.sample_tags().ok_or_else(|| {
                        CliError::Core(catex_core::Error::Validation(
                            "sample-holdout needs a tagged feature file".into(),
                        ))
                    })?;
                    tags.iter().collect::<std::collections::BTreeSet<_>>().len()
                }
            };
            let opts = EvaluateOptions {
                split: SplitSpec {
                    protocol: a.protocol,
                    rounds,
                    seed: a.seed,
                },
                pca_grid: a.pca_grid.map_or(defaults.pca_candidates, |g| g.0),
                folds: a.folds,
                classifier: a.classifier,
                train_on_test: a.train_on_test,
            };
            let report = commands::cmd_evaluate(
                &a.features,
                &opts,
                a.output.as_deref(),
                a.model_output.as_deref(),
            )?;
            print!("{}", commands::format_report(&report, &opts));
            if a.output.is_none() {
                print!("{}", commands::confusion_to_csv(&report.confusion));
            }
        }
        Command::Synth(a) => {
            let params = SynthParams {
                noise: a.noise,
                ..SynthParams::default()
            };
            let outcome = commands::cmd_synth(a.classes, a.per_class, a.size, a.seed, &params, &a.output)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} images in {} classes to {}",
                outcome.manifest.len(),
                outcome.manifest.classes().len(),
                a.output.display()
            );
        }
        Command::VerifyLemmas(a) => {
            let reports = commands::cmd_verify_lemmas(a.max_value, a.length)?;
            for r in &reports {
                println!("{r}");
            }
            commands::check_reports(&reports)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
