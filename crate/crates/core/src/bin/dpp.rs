use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpp_core::cli::{self, load_config, parse_dims, Overrides, TestKind};
use dpp_core::{EnsembleKind, Error, Signs};

#[derive(Parser)]
#[command(name = "dpp", version, about = "Eigenvalue statistics of random matrix products")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verification experiment.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ginibre-product, rectangular-product or truncated-unitary-product.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Block size of truncated-unitary-product.
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated sizes, e.g. 40,50,60.
    #[arg(long)]
    dims: Option<String>,
    /// One character per factor, e.g. +-+.
    #[arg(long, allow_hyphen_values = true)]
    signs: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Reference sample size for mixture comparisons.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// radial-finite, radial-limit, moments, kernel-pair, gschur or angular.
    #[arg(long)]
    test: Option<String>,
    /// Output directory for manifest.json and data.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    allowance: Option<f64>,
}

fn overrides(a: RunArgs) -> Result<(Option<PathBuf>, Overrides), Error> {
    Ok((
        a.config,
        Overrides {
            ensemble: a.ensemble.map(|s| s.parse::<EnsembleKind>()).transpose()?,
            n: a.n,
            m: a.m,
            dims: a.dims.as_deref().map(parse_dims).transpose()?,
            signs: a.signs.map(|s| s.parse::<Signs>()).transpose()?,
            trials: a.trials,
            samples: a.samples,
            seed: a.seed,
            test: a.test.map(|s| s.parse::<TestKind>()).transpose()?,
            out: a.out,
            svg: a.svg,
            allowance: a.allowance,
        },
    ))
}

fn execute(a: RunArgs) -> Result<cli::RunManifest, Error> {
    let (path, o) = overrides(a)?;
    let base = path.as_deref().map(load_config).transpose()?;
    let config = o.resolve(base)?;
    cli::run(&config)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_USAGE as u8 } else { 0 });
        }
    };
    let Command::Run(run_args) = args.command;
    match execute(run_args) {
        Ok(manifest) => {
            println!("{}", manifest.to_json());
            for c in &manifest.checks {
                eprintln!(
                    "{} {}: {:.6e} (threshold {:.6e}, n = {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.description,
                    c.statistic,
                    c.threshold,
                    c.count
                );
            }
            ExitCode::from(if manifest.verdict { cli::EXIT_PASS } else { cli::EXIT_STAT_FAIL } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
