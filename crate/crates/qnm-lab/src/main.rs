//! `qnm-lab`: runs quasinormal-mode experiments from a config file and writes
//! CSV datasets plus a JSON manifest.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad command line or config,
//! 3 numerical failure (the error name is recorded in the manifest).

mod config;
mod experiments;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use output::Manifest;

#[derive(Parser)]
#[command(name = "qnm-lab", version, about = "Quasinormal-mode experiments: norms, completeness, 1D PML spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (falls back to QNMLAB_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available experiments.
    List,
}

#[derive(Debug)]
pub enum LabError {
    Config(String),
    Numerical(qnm_core::Error),
    Io(std::io::Error),
}

impl From<qnm_core::Error> for LabError {
    fn from(e: qnm_core::Error) -> Self {
        LabError::Numerical(e)
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Numerical(e) if e.to_string() == e.name() => write!(f, "numerical failure: {e}"),
            LabError::Numerical(e) => write!(f, "numerical failure: {}: {e}", e.name()),
            LabError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl LabError {
    fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            LabError::Io(_) => 1,
            LabError::Config(_) => 2,
            LabError::Numerical(_) => 3,
        })
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize, LabError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("QNMLAB_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| LabError::Config(format!("QNMLAB_THREADS={v:?} is not a count")))?,
            Err(_) => 0,
        },
    };
    Ok(n)
}

fn run(path: PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), LabError> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = Config::parse(&text)?;
    let echo: toml::Table = toml::from_str(&text).map_err(|e| LabError::Config(e.to_string()))?;
    let echo = serde_json::to_value(echo).map_err(|e| LabError::Config(e.to_string()))?;
    let exp = experiments::find(&cfg.experiment)
        .ok_or_else(|| LabError::Config(format!("unknown experiment `{}` (see `qnm-lab list`)", cfg.experiment)))?;
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("qnm-out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads)?)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;

    let result = pool.install(|| (exp.run)(&cfg));
    let (datasets, warnings, error) = match result {
        Ok(o) => (o.datasets, o.warnings, None),
        Err(LabError::Numerical(e)) => (Vec::new(), Vec::new(), Some(e)),
        Err(e) => return Err(e),
    };
    let manifest =
        Manifest { experiment: exp.name, config_echo: echo, outputs: &datasets, warnings: &warnings, error: error.as_ref() };
    output::write_all(&dir, &datasets, &manifest.to_json()).map_err(LabError::Io)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match error {
        Some(e) => Err(LabError::Numerical(e)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in &experiments::EXPERIMENTS {
                println!("{:<18}{}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, threads } => match run(config, out, threads) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("qnm-lab: {e}");
                e.exit_code()
            }
        },
    }
}
