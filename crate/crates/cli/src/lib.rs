//! Command-line front end: `solve`, `sweep`, `audit` and `run-fixture`.
//!
//! Exit codes: 0 converged (or fixture / audit passed), 2 iteration limit,
//! 3 stagnated, 4 error, 5 audit or fixture check failed, 1 usage error.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cutters::Mode;

pub use config::{ProblemConfig, TraceFormat};

pub const EXIT_ERROR: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "cutters",
    version,
    about = "Averaged relaxed cutter methods for convex feasibility"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Trace format; overrides the config file.
    #[arg(long, global = true, value_enum)]
    pub format: Option<TraceFormat>,
    /// Output file (a directory for `run-fixture`); `-` is stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Parameter mode; overrides the config file.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem in a config file and write its trace.
    Solve { config: PathBuf },
    /// Solve on every cell of a parameter grid and write one summary row per cell.
    Sweep {
        config: PathBuf,
        /// `name=v1,v2,..` for name in gamma, mu, lambda; repeatable.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// Worker threads (default: available cores, at most 8).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sample the cutter and operator inequalities of a config.
    Audit {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Half-width of the sampling box.
        #[arg(long, default_value_t = 10.0)]
        half_width: f64,
    },
    /// Run and verify a named fixture.
    RunFixture {
        /// One of the gallery names; `list` prints them.
        name: String,
    },
}

/// Runs a parsed command line and returns the process exit code. Output
/// meant for files goes to `stdout` when no `--out` is given.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let result = match &cli.command {
        Command::Solve { config } => commands::solve(&cli.global, config, stdout, stderr),
        Command::Sweep { config, grid, jobs } => {
            commands::sweep(&cli.global, config, grid, *jobs, stdout)
        }
        Command::Audit {
            config,
            samples,
            seed,
            half_width,
        } => commands::audit(&cli.global, config, *samples, *seed, *half_width, stdout),
        Command::RunFixture { name } => commands::run_fixture(&cli.global, name, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
