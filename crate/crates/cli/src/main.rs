use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fracbridge_cli::{output_dir, parse_config, run, ConfigError, Subcommand, OUT_ENV};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Simulate,
    Estimate,
    Consistency,
    Limitlaw,
    Constants,
    Selftest,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => Subcommand::Simulate,
            Command::Estimate => Subcommand::Estimate,
            Command::Consistency => Subcommand::Consistency,
            Command::Limitlaw => Subcommand::Limitlaw,
            Command::Constants => Subcommand::Constants,
            Command::Selftest => Subcommand::Selftest,
        }
    }
}

/// Complex fractional Brownian bridges: simulation, drift estimation and limit-law experiments.
#[derive(Parser)]
#[command(name = "fracbridge", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (takes precedence over FRACBRIDGE_OUT and the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = output_dir(args.out, std::env::var(OUT_ENV).ok(), &cfg);
    match run(args.command.into(), &cfg, &out) {
        Ok(o) if o.failed => {
            eprintln!("selftest failed; see {}", out.display());
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
