use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use padic_moments::verify::Suite;
use padic_moments_cli::{
    cache_from_env, cmd_kurihara_search, cmd_moment_run, cmd_tw_scan, cmd_verify, exit, parse_list, CliError,
    CliResult, OutputFormat, Overrides, RunConfig, CACHE_ENV,
};

#[derive(Parser, Debug)]
#[command(name = "padic-moments", version, about = "Exact moment valuations of horizontal p-adic measures")]
struct Cli {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Curve JSON file or built-in label (11a1, 37a1).
    #[arg(long, global = true)]
    curve: Option<String>,
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Comma-separated auxiliary primes.
    #[arg(long, global = true)]
    primes: Option<String>,
    /// Comma-separated primitive roots, one per prime.
    #[arg(long, global = true)]
    generators: Option<String>,
    /// Number of leading primes that need not be Taylor-Wiles.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Comma-separated factor counts at which to evaluate moments.
    #[arg(long, global = true)]
    levels: Option<String>,
    #[arg(long, global = true)]
    m: Option<u32>,
    #[arg(long, global = true)]
    out: Option<OutputFormat>,
    /// Symbol cache directory.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Decimal digits for period integrals.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify primes l = 1 mod p up to a bound.
    TwScan {
        #[arg(long, default_value_t = 200)]
        bound: u64,
        /// How many usable primes to list.
        #[arg(long, default_value_t = 10)]
        first: usize,
    },
    /// Build the measure (or a synthetic one) and evaluate moments.
    MomentRun,
    /// Run a self-check suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Search for a prime witnessing a unit twisted sum.
    KuriharaSearch {
        #[arg(long, default_value_t = 200)]
        bound: u64,
        /// Skip the follow-up moment run.
        #[arg(long)]
        no_run: bool,
    },
}

fn run(cli: Cli) -> CliResult<(String, i32)> {
    let overrides = Overrides {
        curve: cli.curve,
        p: cli.p,
        primes: cli.primes.as_deref().map(parse_list).transpose()?,
        generators: cli.generators.as_deref().map(parse_list).transpose()?,
        r: cli.r,
        levels: cli.levels.as_deref().map(parse_list).transpose()?,
        m: cli.m,
        out: cli.out,
        cache: cli.cache.or_else(cache_from_env),
        seed: cli.seed,
        precision: cli.precision,
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), &overrides)?;
    let output = match cli.command {
        Command::TwScan { bound, first } => cmd_tw_scan(&cfg, bound, first)?,
        Command::MomentRun => cmd_moment_run(&cfg)?,
        Command::Verify { suite } => cmd_verify(&cfg, suite)?,
        Command::KuriharaSearch { bound, no_run } => cmd_kurihara_search(&cfg, bound, !no_run)?,
    };
    Ok((output.render(cfg.out), output.code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code as u8)
        }
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
