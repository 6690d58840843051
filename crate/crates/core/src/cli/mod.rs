//! Batch front-end behind the `rough-heat` binary.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
//! 4 I/O failure.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use commands::Outputs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run one scheme and write the trajectory, probe traces and a manifest.
    Simulate,
    /// Run a convergence study and write the error report.
    Converge,
    /// Measure driver approximation errors over many seeds.
    DriverStats,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::DriverStats => "driver-stats",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "rough-heat", version, about = "Rough heat equation solvers and convergence studies")]
pub struct RunManifest {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override a config key, e.g. `--set k=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Shorthand for `--set seed=INT`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

impl RunManifest {
    fn all_overrides(&self) -> Vec<String> {
        let mut o = self.overrides.clone();
        if let Some(s) = self.seed {
            o.push(format!("seed={s}"));
        }
        o
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::DegenerateFit(_) => 2,
        Error::NonFinite { .. } | Error::Embedding(_) => 3,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
    }
}

/// Validates, computes and returns the files without touching the disk.
pub fn execute(m: &RunManifest) -> Result<Outputs> {
    let table = config::load_table(m.config.as_deref(), &m.all_overrides())?;
    let work = || -> Result<Outputs> {
        match m.command {
            Command::Simulate => {
                let c: config::SimulateConfig = config::parse(table)?;
                Ok(commands::simulate(&c)?.outputs)
            }
            Command::Converge => {
                let c: config::ConvergeConfig = config::parse(table)?;
                Ok(commands::converge(&c)?.1)
            }
            Command::DriverStats => {
                let c: config::DriverStatsConfig = config::parse(table)?;
                Ok(commands::driver_stats(&c)?.1)
            }
        }
    };
    match m.threads {
        Some(0) => Err(Error::Config("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Writes every file of `outputs` into `dir`, one at a time.
pub fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &outputs.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

/// Full command: execute, write, report. Returns the process exit code.
pub fn run(m: &RunManifest) -> i32 {
    let res = execute(m).and_then(|out| write_outputs(&m.out, &out).map(|_| out));
    match res {
        Ok(out) => {
            if !m.quiet {
                print!("{}", out.summary);
                for (name, _) in &out.files {
                    println!("wrote {}", m.out.join(name).display());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("rough-heat {}: {e}", m.command.name());
            exit_code(&e)
        }
    }
}
