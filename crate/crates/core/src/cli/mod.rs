//! Command-line front end: covering numbers, closure dimension, games,
//! tournaments and fixture regression runs, all reported as `key=value` lines.

mod commands;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::fixtures::FixtureError;
use crate::game::GameError;
use crate::hypothesis::HypothesisError;
use crate::metric_core::{MetricError, Scalar};
use crate::players::PlayerError;

pub use report::{sha256_hex, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Player(#[from] PlayerError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
}

#[derive(Debug, Parser)]
#[command(name = "genlab", version, about = "Generation games on metric instance spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    #[arg(long, global = true, default_value = "1/2")]
    pub eps: Scalar,
    #[arg(long = "eps-prime", global = true, default_value = "1/2")]
    pub eps_prime: Scalar,
    #[arg(long, global = true, default_value = "1")]
    pub r: Scalar,
    #[arg(long, global = true, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "GENLAB_BUDGET", default_value_t = 2000)]
    pub budget: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverMode {
    Exact,
    Greedy,
    Packing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DimMode {
    Formula,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expectation {
    Correct,
    Fails,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covering or packing numbers of a points file.
    Cover {
        points: PathBuf,
        #[arg(long = "radius", required = true, num_args = 1..)]
        radii: Vec<Scalar>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: CoverMode,
    },
    /// Closure dimension of a class file or `fixture:<name>`.
    Dim {
        class: String,
        #[arg(long, value_enum, default_value = "formula")]
        mode: DimMode,
        /// Points file for brute mode.
        #[arg(long)]
        ground: Option<PathBuf>,
        #[arg(long = "max-len")]
        max_len: Option<usize>,
    },
    /// One game; writes the transcript and reports the verdicts.
    Play {
        class: String,
        #[arg(long)]
        generator: String,
        #[arg(long)]
        adversary: String,
        #[arg(long, default_value = "transcript.txt")]
        transcript: PathBuf,
        #[arg(long = "d-star")]
        d_star: Option<usize>,
        #[arg(long = "d-h")]
        d_h: Option<usize>,
        /// Skip the UUS precondition check.
        #[arg(long = "uus-override")]
        uus_override: bool,
        /// Exit 1 unless the limit verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
    },
    /// Every generator against every adversary over a range of seeds.
    Tournament {
        class: String,
        #[arg(long = "generator", required = true)]
        generators: Vec<String>,
        #[arg(long = "adversary", required = true)]
        adversaries: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long = "uus-override")]
        uus_override: bool,
    },
    /// Registered fixtures.
    Fixture {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Runs a fixture's regime table.
    Verify { fixture: String },
}

#[derive(Debug, Subcommand)]
pub enum FixtureAction {
    List,
    Show { name: String },
}

/// Report text and exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let (report, code) = match &cli.command {
        Command::Cover { points, radii, mode } => (commands::cover(g, points, radii, *mode)?, EXIT_OK),
        Command::Dim { class, mode, ground, max_len } => {
            (commands::dim(g, class, *mode, ground.as_deref(), *max_len)?, EXIT_OK)
        }
        Command::Play { class, generator, adversary, transcript, d_star, d_h, uus_override, expect } => {
            let opts = commands::PlayOpts { d_star: *d_star, d_h: *d_h, uus_override: *uus_override, expect: *expect };
            commands::play(g, class, generator, adversary, transcript, &opts)?
        }
        Command::Tournament { class, generators, adversaries, seeds, uus_override } => {
            (commands::tournament(g, class, generators, adversaries, *seeds, *uus_override)?, EXIT_OK)
        }
        Command::Fixture { action: FixtureAction::List } => (commands::fixture_list(), EXIT_OK),
        Command::Fixture { action: FixtureAction::Show { name } } => (commands::fixture_show(name)?, EXIT_OK),
        Command::Verify { fixture } => commands::verify(g, fixture)?,
    };
    Ok(Outcome { report: report.render(), code })
}

/// Parses, executes and prints; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => match &cli.global.out {
            Some(path) => match std::fs::write(path, &out.report) {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    EXIT_INPUT
                }
            },
            None => {
                print!("{}", out.report);
                out.code
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
