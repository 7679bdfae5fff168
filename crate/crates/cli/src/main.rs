use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use commrep::pipeline::{validate_config, Overrides, Pipeline, Stage};
use commrep::synthetic::{self, SyntheticConfig};
use commrep::Error;

#[derive(Parser)]
#[command(name = "commrep", version, about = "Text, user and sentiment representations of online communities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, select and tokenize the input comments
    Ingest(RunArgs),
    /// Build text and user community vectors
    Vectors(RunArgs),
    /// Train per-community word embeddings
    Embed(RunArgs),
    /// Induce per-community sentiment lexicons
    Induce(RunArgs),
    /// Similarity matrices, correlations and outliers
    Compare(RunArgs),
    /// Agglomerative clustering and AMI
    Cluster(RunArgs),
    /// z2 misalignment matrices
    Misalign(RunArgs),
    /// Lexicon tables and the final report
    Report(RunArgs),
    /// Every stage in order
    All(RunArgs),
    /// Check a config file and print the resolved settings
    Validate(RunArgs),
    /// Write the bundled three-community synthetic corpus as JSON lines
    Synth {
        /// Output file
        #[arg(long, short)]
        out: PathBuf,
        /// Approximate number of tokens
        #[arg(long, default_value_t = 1_000_000)]
        tokens: usize,
        #[arg(long, default_value_t = 2017)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config file (TOML)
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Co-occurrence window
    #[arg(long)]
    window: Option<usize>,
    /// Random-walk restart weight
    #[arg(long)]
    beta: Option<f64>,
    /// Neighbors per word in the propagation graph
    #[arg(long)]
    knn: Option<usize>,
    /// Bootstrap runs
    #[arg(long)]
    runs: Option<usize>,
    /// Dimensions of community vectors and word embeddings
    #[arg(long)]
    dims: Option<usize>,
    /// Words per community that receive sentiment scores
    #[arg(long)]
    top_words: Option<usize>,
    /// Number of clusters
    #[arg(long)]
    clusters: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.out.clone(),
            workers: self.workers,
            rng_seed: self.rng_seed,
            window: self.window,
            beta: self.beta,
            knn: self.knn,
            runs: self.runs,
            dims: self.dims,
            top_words: self.top_words,
            clusters: self.clusters,
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    let (args, stages): (RunArgs, Vec<Stage>) = match command {
        Command::Synth { out, tokens, seed } => {
            let cfg = SyntheticConfig {
                seed,
                target_tokens: tokens,
                ..Default::default()
            };
            let records = synthetic::generate(&cfg);
            synthetic::write_jsonl(&records, &out)?;
            println!("wrote {} comments to {}", records.len(), out.display());
            return Ok(());
        }
        Command::Validate(a) => {
            let cfg = validate_config(&a.config, &a.overrides())?;
            let text = toml::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?;
            print!("{text}");
            return Ok(());
        }
        Command::All(a) => (a, Stage::ALL.to_vec()),
        Command::Ingest(a) => (a, vec![Stage::Ingest]),
        Command::Vectors(a) => (a, vec![Stage::Vectors]),
        Command::Embed(a) => (a, vec![Stage::Embed]),
        Command::Induce(a) => (a, vec![Stage::Induce]),
        Command::Compare(a) => (a, vec![Stage::Compare]),
        Command::Cluster(a) => (a, vec![Stage::Cluster]),
        Command::Misalign(a) => (a, vec![Stage::Misalign]),
        Command::Report(a) => (a, vec![Stage::Report]),
    };
    let cfg = validate_config(&args.config, &args.overrides())?;
    let pipeline = Pipeline::new(cfg)?;
    for stage in stages {
        let outcome = pipeline.run_stage(stage)?;
        let note = if outcome.cache_hit { " (cached)" } else { "" };
        println!("{stage}{note}: {}", outcome.output_dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command).context("commrep failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let validation = matches!(e.downcast_ref::<Error>(), Some(Error::Validation(_)));
            eprintln!("error: {e:#}");
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}
