use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use molekom::parallel::{threads_from_env, Pool};
use molekom::{experiments, Config, RunError, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "molekom", version, about = "Mobile diffusive molecular link: closed forms and Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file, or a bundled experiment with --experiment.
    Run {
        /// Scenario JSON file.
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        experiment: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered experiments.
    List,
    /// Print the bundled config of an experiment.
    ShowConfig { experiment: String },
}

fn run(
    config: Option<PathBuf>,
    experiment: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), RunError> {
    let mut cfg = match (config, experiment) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(&path).map_err(|e| RunError::Io { path, source: e })?;
            Config::from_json(&text)?
        }
        (None, Some(name)) => Config::for_experiment(&name)?,
        (None, None) => return Err(RunError::Validation("give a config file or --experiment".into())),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    // --out only redirects; the recorded config keeps its own output_dir
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let pool = Pool::new(threads_from_env());
    let output = experiments::run(&cfg, &pool)?;
    for path in experiments::write(&cfg, &output, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
            Ok(())
        }
        Command::ShowConfig { experiment } => {
            Config::for_experiment(&experiment).map(|cfg| println!("{}", cfg.to_json()))
        }
        Command::Run { config, experiment, seed, out } => run(config, experiment, seed, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("molekom: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
