//! Experiment harness: config parsing, mode dispatch and run artifacts.
//!
//! Exit codes: 0 ok, 1 other, 2 config, 3 solve failure, 4 unattainable,
//! 5 scan exhausted, 6 degenerate-unresolved.

pub mod config;
pub mod error;
pub mod modes;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{load_config, parse_config, ExperimentConfig, Mode};
pub use error::CliError;
pub use run::{run_experiment, Manifest, RunOutcome};

#[derive(Debug, Parser)]
#[command(name = "extremal-lab", version, about = "Extremal-vector experiments")]
pub struct Cli {
    pub mode: Mode,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config field, `section.key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// Resolve the config for a parsed command line.
pub fn resolve(cli: &Cli) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &cli.config {
        Some(p) => (
            load_config(p, &cli.set)?,
            p.parent().map(PathBuf::from).unwrap_or_default(),
        ),
        None => (parse_config("", &cli.set)?, PathBuf::from(".")),
    };
    cfg.mode = Some(cli.mode);
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok((cfg, base))
}

/// Full command line in, exit code out.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(&cli).and_then(|(cfg, base)| run_experiment(&cfg, &base, cli.workers));
    match outcome {
        Ok(o) => {
            println!("{} {}", o.dir.display(), o.status);
            o.exit
        }
        Err(e) => {
            eprintln!("extremal-lab: {e}");
            e.exit_code()
        }
    }
}
