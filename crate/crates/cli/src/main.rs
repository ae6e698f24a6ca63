//! `pseudonash`: dominance tests, equilibrium checks, game demos, and the
//! separation report, all reproducible from a single seed.
//!
//! Exit codes: 0 pass, 1 verdict fail, 2 usage error, 3 capacity error.

mod commands;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudonash::Error;

use registry::Variant;

#[derive(Parser, Debug)]
#[command(name = "pseudonash", version, about = "Pseudo-Nash equilibrium toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; falls back to $PSEUDONASH_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Rayon worker count; results are identical at any setting.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write reports here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed
            .or_else(|| {
                std::env::var("PSEUDONASH_SEED")
                    .ok()
                    .and_then(|s| s.parse().ok())
            })
            .unwrap_or(0)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Empirical-mean dominance test between two named ensembles.
    Dominance(DominanceArgs),
    /// Pseudo-Nash check: profile utility must dominate each deviation.
    Pseudo(PseudoArgs),
    /// Expected-utility (ε-Nash) check of the same profile and deviations.
    Nash(NashArgs),
    /// Play the commit-and-guess game and summarize guesser payoffs.
    GuessingDemo(GuessingDemoArgs),
    /// Play the secret-sharing game and compare the stop law to closed form.
    HtDemo(HtDemoArgs),
    /// Play the sealed-bid auction and summarize reward rates.
    AuctionDemo(AuctionDemoArgs),
    /// Closed-form (optionally Monte-Carlo) separation table over a κ grid.
    SeparationReport(SeparationArgs),
    /// Chi-square agreement of round-level play with the fast stop sampler.
    CrossValidate(CrossValidateArgs),
    /// Run any subcommand from a JSON experiment description.
    Config(ConfigArgs),
}

#[derive(Args, Debug)]
pub struct DominanceArgs {
    /// Dominating ensemble name.
    #[arg(long)]
    pub x: String,
    /// Challenger ensemble name.
    #[arg(long)]
    pub y: String,
    /// One report per κ.
    #[arg(long, value_delimiter = ',', required = true)]
    pub kappa: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub c: u32,
    #[arg(long = "c-hat")]
    pub c_hat: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    /// Override m = κ^ĉ with a fixed per-trial sample count.
    #[arg(long)]
    pub m: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PseudoArgs {
    #[arg(long)]
    pub game: String,
    #[arg(long, default_value = "ideal")]
    pub variant: Variant,
    /// Randomness bit length for the hash commitment variant.
    #[arg(long, default_value_t = 16)]
    pub lambda: u16,
    #[arg(long)]
    pub profile: String,
    /// Comma-separated deviation names.
    #[arg(long = "deviate", value_delimiter = ',', required = true)]
    pub deviations: Vec<String>,
    #[arg(long)]
    pub kappa: u32,
    #[arg(long, default_value_t = 1)]
    pub c: u32,
    #[arg(long = "c-hat")]
    pub c_hat: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    #[arg(long)]
    pub m: Option<u64>,
    /// Sample stop iterations directly instead of simulating rounds.
    #[arg(long)]
    pub fast: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct NashArgs {
    #[arg(long)]
    pub game: String,
    #[arg(long, default_value = "ideal")]
    pub variant: Variant,
    #[arg(long, default_value_t = 16)]
    pub lambda: u16,
    #[arg(long)]
    pub profile: String,
    #[arg(long = "deviate", value_delimiter = ',', required = true)]
    pub deviations: Vec<String>,
    #[arg(long)]
    pub kappa: u32,
    #[arg(long = "samples", default_value_t = 10_000)]
    pub sample_count: u32,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GuessingDemoArgs {
    #[arg(long, default_value_t = 8)]
    pub kappa: u32,
    #[arg(long, default_value = "ideal")]
    pub variant: Variant,
    #[arg(long, default_value_t = 16)]
    pub lambda: u16,
    /// When set, the guesser brute-forces the commitment with this budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub plays: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HtDemoArgs {
    #[arg(long, default_value_t = 10)]
    pub kappa: u32,
    #[arg(long, default_value_t = 1000)]
    pub plays: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct AuctionDemoArgs {
    #[arg(long, default_value_t = 8)]
    pub kappa: u32,
    #[arg(long, default_value = "hash")]
    pub variant: Variant,
    #[arg(long, default_value_t = 8)]
    pub lambda: u16,
    #[arg(long, default_value_t = 131072)]
    pub budget: u64,
    #[arg(long, default_value_t = 200)]
    pub plays: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SeparationArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub kappa: Vec<u32>,
    /// Add Monte-Carlo gap columns estimated from this many plays.
    #[arg(long = "mc-plays")]
    pub mc_plays: Option<u64>,
    #[arg(long, default_value = "json")]
    pub format: commands::Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CrossValidateArgs {
    #[arg(long, default_value_t = 10)]
    pub kappa: u32,
    /// Round-level plays and fast-sampler draws per side.
    #[arg(long, default_value_t = 2000)]
    pub plays: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// JSON document: {"argv": ["dominance", "--x", ...]} or a flat object
    /// {"subcommand": "...", "kappa": [...], ...}.
    pub path: PathBuf,
}

fn exit_code(result: Result<bool, Error>) -> ExitCode {
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Capacity { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<bool, Error> {
    match command {
        Command::Dominance(args) => commands::run_dominance(args),
        Command::Pseudo(args) => commands::run_pseudo(args),
        Command::Nash(args) => commands::run_nash(args),
        Command::GuessingDemo(args) => commands::run_guessing_demo(args),
        Command::HtDemo(args) => commands::run_ht_demo(args),
        Command::AuctionDemo(args) => commands::run_auction_demo(args),
        Command::SeparationReport(args) => commands::run_separation(args),
        Command::CrossValidate(args) => commands::run_cross_validate(args),
        Command::Config(args) => {
            let cli = commands::parse_config(&args.path)?;
            dispatch(cli.command)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    exit_code(dispatch(cli.command))
}
