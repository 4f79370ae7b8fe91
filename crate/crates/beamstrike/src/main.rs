//! The beamstrike CLI: attack a dataset, sweep hyperparameters, analyze
//! outcomes, and serve the bundled stub endpoints.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use beamstrike::analyze::run_analysis;
use beamstrike::config::RunConfig;
use beamstrike::runner::{run_attack, summary_table, RunOptions};
use beamstrike::rpc::{serve_loop, serve_stdio, Handler};
use beamstrike::stub::{
    demo_provider, demo_victim, provider_handler, similarity_handler, tagger_handler,
    victim_handler,
};
use beamstrike::sweep::{render_rows, run_sweep};
use beamstrike::RunnerError;
use beamstrike_core::bodega::TokenF1Similarity;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beamstrike",
    version,
    about = "Beam-search word-level adversarial attacks on text classifiers, \
             with composite-score evaluation and POS analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attack every sample in a dataset and write outcomes, evaluation
    /// records, and the aggregate summary.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the LIME RNG seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Attack this many samples concurrently.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Overrides the per-sample query budget from the config.
        #[arg(long = "max-queries")]
        max_queries: Option<u64>,
    },
    /// Run the config's [sweep] grid on a seeded dataset subset, one summary
    /// row per cell.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the subset seed from the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Overrides the per-sample query budget from the spec.
        #[arg(long = "max-queries")]
        max_queries: Option<u64>,
    },
    /// Analyze successful outcomes: WSR distributions, POS tag changes, and
    /// the transition matrix, with figures and CSV sidecars.
    Analyze {
        /// One or more attack output directories containing outcomes.jsonl.
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Optional config whose [tagger] section picks the POS tagger
        /// (defaults to the bundled rule tagger).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve one of the bundled stub endpoints for desk-scale testing of
    /// the external-adapter paths.
    Stub {
        #[command(subcommand)]
        kind: StubKind,
    },
}

#[derive(Subcommand)]
enum StubKind {
    /// Serve a victim classifier on POST /predict_proba.
    Victim {
        /// Config whose [victim] section defines the served model
        /// (defaults to the built-in demo vocabulary).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
        /// Speak line-delimited JSON on stdin/stdout instead of HTTP.
        #[arg(long)]
        stdio: bool,
    },
    /// Serve a fill-mask candidate provider on POST /fill_mask.
    Mlm {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
        #[arg(long)]
        stdio: bool,
    },
    /// Serve the token-F1 similarity scorer on POST /similarity.
    Similarity {
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
        #[arg(long)]
        stdio: bool,
    },
    /// Serve the rule-based POS tagger on POST /tag.
    Tagger {
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
        #[arg(long)]
        stdio: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), RunnerError> {
    match cli.command {
        Command::Attack {
            config,
            dataset,
            out,
            seed,
            workers,
            max_queries,
        } => {
            let options = RunOptions {
                seed,
                workers,
                max_queries,
            };
            let artifacts = run_attack(&config, &dataset, &out, &options)?;
            println!("{}", summary_table(&artifacts.summary));
            println!(
                "wrote {}, {}, {}",
                artifacts.outcomes_path.display(),
                artifacts.records_path.display(),
                artifacts.summary_path.display()
            );
            Ok(())
        }
        Command::Sweep {
            spec,
            dataset,
            out,
            seed,
            workers,
            max_queries,
        } => {
            let options = RunOptions {
                seed,
                workers,
                max_queries,
            };
            let artifacts = run_sweep(&spec, &dataset, &out, &options)?;
            print!("{}", render_rows(&artifacts.rows));
            println!(
                "swept {} cells on {} samples; wrote {} and {}",
                artifacts.rows.len(),
                artifacts.subset_size,
                artifacts.csv_path.display(),
                artifacts.json_path.display()
            );
            Ok(())
        }
        Command::Analyze {
            inputs,
            out,
            config,
        } => {
            let tagger = match config {
                Some(path) => RunConfig::load(&path)?.tagger.build()?,
                None => Arc::new(beamstrike_core::analysis::RuleTagger),
            };
            let artifacts = run_analysis(&inputs, &out, tagger.as_ref())?;
            for path in &artifacts.paths {
                println!("wrote {}", path.display());
            }
            println!(
                "{} successes analyzed; {} in the transition matrix",
                artifacts.summary.successes, artifacts.summary.transition_total
            );
            Ok(())
        }
        Command::Stub { kind } => serve_stub(kind),
    }
}

fn load_victim_spec(config: Option<PathBuf>) -> Result<Arc<dyn beamstrike_core::Victim + Send + Sync>, RunnerError> {
    match config {
        Some(path) => RunConfig::load(&path)?.victim.build(),
        None => Ok(Arc::new(demo_victim())),
    }
}

fn load_provider_spec(
    config: Option<PathBuf>,
) -> Result<Arc<dyn beamstrike_core::CandidateProvider + Send + Sync>, RunnerError> {
    match config {
        Some(path) => RunConfig::load(&path)?.provider.build(),
        None => Ok(Arc::new(demo_provider())),
    }
}

fn serve_stub(kind: StubKind) -> Result<(), RunnerError> {
    let (handler, listen, stdio): (Handler, String, bool) = match kind {
        StubKind::Victim {
            config,
            listen,
            stdio,
        } => (victim_handler(load_victim_spec(config)?), listen, stdio),
        StubKind::Mlm {
            config,
            listen,
            stdio,
        } => (provider_handler(load_provider_spec(config)?), listen, stdio),
        StubKind::Similarity { listen, stdio } => (
            similarity_handler(Arc::new(TokenF1Similarity)),
            listen,
            stdio,
        ),
        StubKind::Tagger { listen, stdio } => (
            tagger_handler(Arc::new(beamstrike_core::analysis::RuleTagger)),
            listen,
            stdio,
        ),
    };

    if stdio {
        serve_stdio(handler)?;
        return Ok(());
    }

    let listener = std::net::TcpListener::bind(&listen)?;
    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    use std::io::Write;
    std::io::stdout().flush()?;
    serve_loop(listener, handler, None);
    Ok(())
}
