//! `senseball`: build nested sense balls, prepare hypernym-level datasets,
//! train the encoder and evaluate it.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig, UsageError};
use senseball::evaluator::FixtureSpec;
use senseball::SenseId;

#[derive(Debug, Parser)]
#[command(name = "senseball", version, about = "Word-sense disambiguation with nested sense balls")]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, short = 'c', global = true)]
    config: Option<PathBuf>,
    /// More log output (repeat for debug).
    #[arg(long, short = 'v', action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct balls for `inventory` from `embeddings`, write them to `balls`.
    BuildBalls,
    /// Check `balls` against the nesting and disconnection conditions of `inventory`.
    VerifyBalls,
    /// Write ball-covered datasets at each level into `out`.
    Prepare {
        /// Annotated corpus as NAME=PATH; repeatable.
        #[arg(long = "corpus", value_parser = commands::named_path)]
        corpora: Vec<(String, PathBuf)>,
    },
    /// Train the encoder on a prepared dataset and write `checkpoint`.
    Train {
        /// A prepared dataset file such as `prepared/train.L1.tsv`.
        #[arg(long)]
        data: PathBuf,
    },
    /// Evaluate `checkpoint` on prepared datasets at each level; reports go to `out`.
    Eval {
        /// Directory written by `prepare`.
        #[arg(long)]
        data: PathBuf,
        /// Dataset name; repeatable.
        #[arg(long = "dataset", required = true)]
        datasets: Vec<String>,
    },
    /// Answer whether the ball of A lies inside the ball of B.
    Query { a: SenseId, b: SenseId },
    /// Print the effective configuration.
    ShowConfig,
    /// Write a seeded synthetic taxonomy, embeddings and corpora into `out`.
    MakeFixture {
        #[arg(long, default_value_t = 4)]
        n_top: usize,
        #[arg(long, default_value_t = 3)]
        senses_per_parent: usize,
        #[arg(long, default_value_t = 200)]
        vocab_size: usize,
        #[arg(long, default_value_t = 200)]
        records_per_sense: usize,
        #[arg(long, default_value_t = 50)]
        test_per_sense: usize,
        #[arg(long, default_value_t = 0)]
        upper_chain: usize,
        #[arg(long, default_value_t = 16)]
        embedding_dim: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    log::debug!("effective config:\n{}", cfg.render());
    match cli.command {
        Command::BuildBalls => commands::build_balls(&cfg),
        Command::VerifyBalls => commands::verify_balls(&cfg),
        Command::Prepare { corpora } => commands::prepare(&cfg, &corpora),
        Command::Train { data } => commands::train_cmd(&cfg, &data),
        Command::Eval { data, datasets } => commands::eval(&cfg, &data, &datasets),
        Command::Query { a, b } => commands::query(&cfg, &a, &b),
        Command::ShowConfig => commands::show_config(&cfg),
        Command::MakeFixture {
            n_top,
            senses_per_parent,
            vocab_size,
            records_per_sense,
            test_per_sense,
            upper_chain,
            embedding_dim,
        } => commands::make_fixture(
            &cfg,
            &FixtureSpec {
                seed: cfg.train.seed,
                n_top,
                senses_per_parent,
                vocab_size,
                records_per_sense,
                test_per_sense,
                upper_chain,
                embedding_dim,
                ..FixtureSpec::default()
            },
        ),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        1
    } else if err.chain().any(|e| e.is::<commands::VerificationFailed>()) {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
