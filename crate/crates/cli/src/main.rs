use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdot_cli::{run_all, run_extract, run_ground, run_propagate, run_validate, CliError, RunConfig, Source};

/// Transition probabilities of a driven two-electron quantum dot.
#[derive(Debug, Parser)]
#[command(name = "qdot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value config file; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `outputs`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Channel states and Kohn-Sham ground states.
    Ground,
    /// Time propagation of the chosen sources (all four by default).
    Propagate {
        #[arg(long, value_enum)]
        source: Vec<Source>,
    },
    /// Figures, transition table and summary from the stored traces.
    Extract,
    /// Oracle checks against the stored artifacts.
    Validate,
    /// Every stage in order.
    All,
    /// Print the resolved configuration.
    Config,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.outputs = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Ground => run_ground(&cfg).map(|_| ()),
        Command::Propagate { source } => {
            let sources = if source.is_empty() {
                Source::ALL.to_vec()
            } else {
                source.clone()
            };
            run_propagate(&cfg, &sources)
        }
        Command::Extract => run_extract(&cfg),
        Command::Validate => run_validate(&cfg).map(|_| ()),
        Command::All => run_all(&cfg).map(|_| ()),
        Command::Config => {
            print!("{}", cfg.serialize());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
