//! Experiment runner behind the `fracbridge` binary.

pub mod commands;
pub mod config;
pub mod selftest;

use std::path::PathBuf;

pub use commands::{run, Outcome};
pub use config::{parse_config, Config, ConfigError, Subcommand};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "FRACBRIDGE_OUT";

/// `--out`, then `FRACBRIDGE_OUT`, then the config, then `out`.
pub fn output_dir(cli: Option<PathBuf>, env: Option<String>, cfg: &Config) -> PathBuf {
    cli.or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
