use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semshift::cli::{self, RunConfig, StageError};
use semshift::Error;

#[derive(Parser)]
#[command(
    name = "semshift",
    version,
    about = "Detect lexical semantic change between two corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set sgns.dim=150`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SpaceArgs {
    /// Earlier embeddings (default: <output_dir>/earlier.vec).
    #[arg(long)]
    earlier: Option<PathBuf>,
    /// Later embeddings (default: <output_dir>/later.vec).
    #[arg(long)]
    later: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one embedding space per corpus slice.
    Train(ConfigArgs),
    /// Fit the transform between the two spaces.
    Align {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        spaces: SpaceArgs,
    },
    /// Score targets by cosine distance after alignment.
    Score {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        spaces: SpaceArgs,
        /// Transform file (default: <output_dir>/transform.txt).
        #[arg(long)]
        transform: Option<PathBuf>,
    },
    /// Turn scores into binary decisions.
    Classify {
        #[command(flatten)]
        config: ConfigArgs,
        /// Scores TSV (default: <output_dir>/scores.tsv).
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Run the repeated-runs ranking schedule.
    Rank(ConfigArgs),
    /// Compute accuracy of predictions against gold labels.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Inject synthetic changes into the later corpus.
    Synth {
        #[command(flatten)]
        config: ConfigArgs,
        /// Injection plan (TOML).
        #[arg(long)]
        plan: PathBuf,
    },
    /// Train, align, score, classify and evaluate in one go.
    Pipeline(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<RunConfig, StageError> {
    RunConfig::load(&args.config, &args.overrides).map_err(|source| StageError {
        stage: "config",
        source,
    })
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Train(args) => {
            let out = cli::cmd_train(&load(&args)?)?;
            println!("{}\n{}", out.earlier.display(), out.later.display());
        }
        Command::Align { config, spaces } => {
            let c = load(&config)?;
            let (e, l) = space_paths(&c, spaces);
            println!("{}", cli::cmd_align(&c, &e, &l)?.display());
        }
        Command::Score {
            config,
            spaces,
            transform,
        } => {
            let c = load(&config)?;
            let (e, l) = space_paths(&c, spaces);
            let t = transform.unwrap_or_else(|| c.output(cli::commands::TRANSFORM));
            let out = cli::cmd_score(&c, &t, &e, &l)?;
            println!("{}\n{}", out.scores.display(), out.missing.display());
        }
        Command::Classify { config, scores } => {
            let c = load(&config)?;
            let s = scores.unwrap_or_else(|| c.output(cli::commands::SCORES));
            println!("{}", cli::cmd_classify(&c, &s)?.display());
        }
        Command::Rank(args) => {
            let out = cli::cmd_rank(&load(&args)?)?;
            if let Some(w) = &out.warning {
                eprintln!("warning: {w}");
            }
            for p in [&out.ledger, &out.summary, &out.stability, &out.decisions] {
                println!("{}", p.display());
            }
        }
        Command::Eval { predictions, gold } => {
            let report = cli::cmd_eval(&predictions, &gold)?;
            report
                .write(std::io::stdout().lock())
                .map_err(|source| StageError {
                    stage: "eval",
                    source,
                })?;
        }
        Command::Synth { config, plan } => {
            let out = cli::cmd_synth(&load(&config)?, &plan)?;
            println!("{}\n{}", out.corpus.display(), out.gold.display());
        }
        Command::Pipeline(args) => {
            let out = cli::cmd_pipeline(&load(&args)?)?;
            if let Some(w) = &out.warning {
                eprintln!("warning: {w}");
            }
            println!("{}", out.decisions.display());
            if let Some(r) = out.eval {
                println!("accuracy\t{}", r.accuracy);
            }
        }
    }
    Ok(())
}

fn space_paths(c: &RunConfig, s: SpaceArgs) -> (PathBuf, PathBuf) {
    (
        s.earlier
            .unwrap_or_else(|| c.output(cli::commands::EARLIER_VEC)),
        s.later
            .unwrap_or_else(|| c.output(cli::commands::LATER_VEC)),
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.source {
                Error::Config(_) | Error::Plan(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
