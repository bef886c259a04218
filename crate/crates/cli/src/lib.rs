//! The `pmvc` command line: load or generate an instance, run one analysis,
//! print a report.
//!
//! Exit codes: 0 success, 1 analysis-level negative (a failed check, a
//! golden mismatch, a refuted equilibrium), 2 usage or input error.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pmvc_core::{BrMethod, GameInstance, Rational, DEFAULT_PROFILE_CAP};

pub mod commands;
pub mod input;

use input::GenSpec;

#[derive(Parser, Debug)]
#[command(name = "pmvc", version, about = "Exact analysis of vendor pricing games with a submodular buyer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Built-in instance instead of a file: counterexample, harmonic:K,M,
    /// pos:K,M[,EPS], random:N,K[,coverage|concave], cdsp:N,K,R.
    #[arg(long, global = true, value_name = "NAME:ARGS")]
    pub gen: Option<GenSpec>,
    /// Best-response method for the continuous-price game.
    #[arg(long, global = true, default_value = "exact", value_parser = parse_method)]
    pub method: BrMethod,
    /// Cap on enumerated profiles (and grid assignments).
    #[arg(long, global = true, default_value_t = DEFAULT_PROFILE_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    /// Epsilon for the pos generator when the spec omits it.
    #[arg(long, global = true, value_name = "R")]
    pub eps: Option<Rational>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Payoff CSV to compare the table against.
    #[arg(long, global = true, value_name = "PATH")]
    pub golden: Option<PathBuf>,
    /// Seed for the random generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Accept valuations that are not monotone submodular.
    #[arg(long, global = true)]
    pub diagnostic: bool,
}

fn parse_method(s: &str) -> Result<BrMethod, String> {
    s.parse()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that the valuation is monotone and submodular.
    Check { instance: Option<PathBuf> },
    /// Price-moderated payoff table over every profile.
    Table { instance: Option<PathBuf> },
    /// Pure Nash equilibria of the price-moderated game.
    Ne { instance: Option<PathBuf> },
    /// Price of anarchy and stability against the H_m + 1 bound.
    Poa {
        instance: Option<PathBuf>,
        /// Also check both welfare inequalities behind the bound.
        #[arg(long)]
        lemmas: bool,
    },
    /// Best-response dynamics.
    Brd {
        instance: Option<PathBuf>,
        /// Start profile such as "{a}|{c}" (price-moderated game).
        #[arg(long, conflicts_with = "prices")]
        start: Option<String>,
        /// Start prices such as "a=2,b=3" (continuous game); unlisted items
        /// are priced out.
        #[arg(long)]
        prices: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Closed-form equilibrium of a category-max game.
    Cdsp {
        instance: Option<PathBuf>,
        /// Verify it with the exact best-response oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Print a generated instance as JSON.
    Gen,
    /// One vendor's best response in the continuous-price game.
    Bestresp {
        instance: Option<PathBuf>,
        /// Vendor number, starting at 1.
        #[arg(long)]
        vendor: usize,
        /// Competitor prices such as "a=2.601,b=8.6045"; unlisted items are
        /// priced out.
        #[arg(long, default_value = "")]
        prices: String,
    },
    /// Check whether a price vector is an equilibrium of the continuous game.
    Verify {
        instance: Option<PathBuf>,
        /// Prices such as "a=2,c=2"; unlisted items are priced out.
        #[arg(long, required_unless_present = "profile", conflicts_with = "profile")]
        prices: Option<String>,
        /// Use the mechanism prices of this profile, e.g. "{a}|{c}".
        #[arg(long)]
        profile: Option<String>,
    },
}

/// What a command printed and how the process should exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub stdout: String,
    pub code: u8,
}

impl Report {
    fn ok(stdout: String) -> Self {
        Report { stdout, code: 0 }
    }

    fn verdict(stdout: String, pass: bool) -> Self {
        Report {
            stdout,
            code: if pass { 0 } else { 1 },
        }
    }
}

impl Command {
    fn instance(&self) -> Option<&PathBuf> {
        match self {
            Command::Check { instance }
            | Command::Table { instance }
            | Command::Ne { instance }
            | Command::Poa { instance, .. }
            | Command::Brd { instance, .. }
            | Command::Cdsp { instance, .. }
            | Command::Bestresp { instance, .. }
            | Command::Verify { instance, .. } => instance.as_ref(),
            Command::Gen => None,
        }
    }
}

fn load(opts: &Options, path: Option<&PathBuf>) -> Result<GameInstance> {
    match (path, &opts.gen) {
        (Some(_), Some(_)) => bail!("give either an instance file or --gen, not both"),
        (None, None) => bail!("no instance: give a file or --gen NAME:ARGS"),
        (Some(path), None) => input::load_file(path, opts.diagnostic),
        (None, Some(spec)) => spec.build(opts.seed, opts.eps.as_ref()),
    }
}

/// Runs one parsed command line. Errors are usage or input problems.
pub fn run(cli: &Cli) -> Result<Report> {
    let opts = &cli.opts;
    if let Some(threads) = opts.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build_global();
    }
    if let Command::Check { instance } = &cli.command {
        return commands::check(opts, instance.as_ref());
    }
    let g = load(opts, cli.command.instance())?;
    match &cli.command {
        Command::Check { .. } => unreachable!(),
        Command::Gen => commands::gen(opts, &g),
        Command::Table { .. } => commands::table(opts, &g),
        Command::Ne { .. } => commands::ne(opts, &g),
        Command::Poa { lemmas, .. } => commands::poa(opts, &g, *lemmas),
        Command::Brd {
            start,
            prices,
            max_steps,
            ..
        } => commands::brd(opts, &g, start.as_deref(), prices.as_deref(), *max_steps),
        Command::Cdsp { verify, .. } => commands::cdsp(opts, &g, *verify),
        Command::Bestresp { vendor, prices, .. } => commands::bestresp(opts, &g, *vendor, prices),
        Command::Verify { prices, profile, .. } => commands::verify(opts, &g, prices.as_deref(), profile.as_deref()),
    }
}
