//! `testrec`: embed a corpus of method/test pairs and recommend tests for
//! query methods, with a full evaluation pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};

use testrec::config::{ConfigError, RunConfig, Seed};
use testrec::eval::Approach;
use testrec::pipeline::{
    render_recommendations, run_embed, run_eval, run_export_histogram, run_export_radar,
    run_ingest, run_recommend, run_train, PipelineError,
};

#[derive(Debug, Parser)]
#[command(
    name = "testrec",
    version,
    about = "Recommends unit tests for methods via attention-based code embeddings",
    propagate_version = true
)]
struct Cli {
    /// TOML run configuration; flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed (initialization, shuffling, dropout).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory artifacts are written under.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Corpus JSONL of {"id", "focal_method", "test_case"} objects.
    #[arg(long, global = true, value_name = "FILE")]
    corpus: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and clean the corpus; write accepted pairs and a rejection log.
    Ingest,
    /// Build the vocabulary and train the embedding network.
    Train,
    /// Embed the cleaned corpus into the vector store.
    Embed,
    /// Recommend tests for a query method.
    Recommend {
        /// 1 = match similar methods and take their tests;
        /// 2 = match tests directly.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        approach: u8,
        /// Query method source, inline.
        #[arg(long, conflicts_with = "query_file")]
        query: Option<String>,
        /// File containing the query method source.
        #[arg(long, value_name = "FILE")]
        query_file: Option<PathBuf>,
        /// Number of recommendations.
        #[arg(long)]
        k: Option<usize>,
        /// Similarity floor for matching methods (approach 1).
        #[arg(long, allow_negative_numbers = true)]
        tau_method: Option<f64>,
        /// Similarity floor for matching tests (approach 2).
        #[arg(long, allow_negative_numbers = true)]
        tau_test: Option<f64>,
        /// Emit machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate both strategies; write tables, radar and histogram CSVs.
    Eval {
        /// Allow a query's own pair to match (self-matches inflate results).
        #[arg(long)]
        no_leave_one_out: bool,
        /// Token-level instead of character-level edit distance.
        #[arg(long)]
        token_level_lev: bool,
    },
    /// Write the all-samples radar CSV from the current store.
    ExportRadar,
    /// Write the method-vs-test similarity histogram CSV.
    ExportHistogram,
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Seed(seed);
    }
    if let Some(out_dir) = &cli.out_dir {
        cfg.paths.out_dir = out_dir.clone();
    }
    if let Some(corpus) = &cli.corpus {
        cfg.paths.corpus = corpus.clone();
    }
    if let Command::Recommend { k, tau_method, tau_test, .. } = &cli.command {
        if let Some(k) = k {
            cfg.recommend.k = *k;
        }
        if let Some(t) = tau_method {
            cfg.recommend.tau_method = *t;
        }
        if let Some(t) = tau_test {
            cfg.recommend.tau_test = *t;
        }
    }
    if let Command::Eval { no_leave_one_out, token_level_lev } = &cli.command {
        if *no_leave_one_out {
            cfg.eval.leave_one_out = false;
        }
        if *token_level_lev {
            cfg.eval.token_level_levenshtein = true;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write to stdout, treating a closed pipe as a normal early exit the way
/// line-oriented tools behave under `head`.  Rust ignores SIGPIPE, so the
/// closed pipe surfaces here as an io error instead of killing the process.
fn emit(text: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let res = out.write_fmt(text).and_then(|()| out.flush());
    if let Err(e) = res {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(3);
    }
}

macro_rules! say {
    ($($arg:tt)*) => {{
        emit(format_args!($($arg)*));
        emit(format_args!("\n"));
    }};
}

macro_rules! say_raw {
    ($($arg:tt)*) => {
        emit(format_args!($($arg)*))
    };
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Ingest => {
            let s = run_ingest(&cfg)?;
            say!(
                "accepted {} pairs, rejected {} (log: {})",
                s.accepted,
                s.rejected,
                s.rejections_path.display()
            );
        }
        Command::Train => {
            let s = run_train(&cfg)?;
            say!(
                "trained on {} pairs ({} bags); final mean loss {:.6}",
                s.pairs,
                s.bags,
                s.epoch_mean_loss.last().copied().unwrap_or(f64::NAN)
            );
            say!("vocabulary: {}", s.vocab_path.display());
            say!("model: {}", s.model_path.display());
        }
        Command::Embed => {
            let s = run_embed(&cfg)?;
            say!(
                "embedded {} units ({} pairs dropped) -> {}",
                s.entries,
                s.dropped,
                s.store_path.display()
            );
        }
        Command::Recommend { approach, query, query_file, json, .. } => {
            let source = match (query, query_file) {
                (Some(q), None) => q.clone(),
                (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| {
                    PipelineError::data(format!("cannot read query file {}: {e}", path.display()))
                })?,
                _ => {
                    return Err(PipelineError::usage(
                        "provide the query with --query or --query-file",
                    ))
                }
            };
            let approach = Approach::from_number(*approach)
                .expect("clap range-checked the approach number");
            let report = run_recommend(&cfg, &source, approach)?;
            if *json {
                say!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| {
                        PipelineError::internal(format!("serialize report: {e}"))
                    })?
                );
            } else {
                say_raw!("{}", render_recommendations(&report));
            }
        }
        Command::Eval { .. } => {
            let artifacts = run_eval(&cfg)?;
            say_raw!("{}", artifacts.report_text);
            say_raw!("\n");
            for f in &artifacts.files {
                say!("wrote {}", f.display());
            }
        }
        Command::ExportRadar => {
            let path = run_export_radar(&cfg)?;
            say!("wrote {}", path.display());
        }
        Command::ExportHistogram => {
            let path = run_export_histogram(&cfg)?;
            say!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) =>
        {
            say_raw!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
