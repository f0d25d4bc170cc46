//! `delcap`: capacity brackets and limit bounds for binary deletion channels.

mod args;
mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use delcap_core::kernel::{DEFAULT_MAX_N, HARD_MAX_N};
use delcap_core::solver::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use delcap_core::{Exec, SolveOptions, Symmetry};

use crate::args::{parse_external, DGrid, ExternalPoint};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "delcap", version, about = "Certified capacity brackets for binary deletion channels")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Requested bracket width in bits (per channel use, not normalized).
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Optimize over all inputs instead of reverse/complement classes.
    #[arg(long, global = true)]
    pub no_symmetry: bool,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Kernel cache directory.
    #[arg(long, global = true, env = "DELCAP_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Raise the kernel length cap from 14 to 16.
    #[arg(long, global = true)]
    pub allow_large: bool,
}

impl CommonArgs {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            symmetry: if self.no_symmetry { Symmetry::Off } else { Symmetry::Auto },
            exec: Exec::Parallel,
            cache_dir: self.cache_dir.clone(),
            max_n: if self.allow_large { HARD_MAX_N } else { DEFAULT_MAX_N },
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bracket on C_n(d) (with --d) or C_{n,k} (with --k).
    Capacity {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        d: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        /// Append a CSV row to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// C_n(d) over a grid of d for each n, as CSV `n,d,lower,upper`.
    Curve {
        /// Lengths: `12`, `1..12`, or `1,2,4`.
        #[arg(long)]
        n: String,
        #[arg(long, value_parser = DGrid::parse, default_value = "0:1:0.05")]
        d_grid: DGrid,
        /// Output CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper bounds on lim_{d->1} C(d)/(1-d).
    Report {
        /// Block lengths for computed points and exact-channel bounds.
        #[arg(long)]
        n: Option<String>,
        #[arg(long, value_parser = DGrid::parse)]
        d_grid: Option<DGrid>,
        /// Explicit deletion probabilities (comma separated).
        #[arg(long)]
        d: Option<String>,
        /// Kept counts for the exact-channel bound (comma separated).
        #[arg(long)]
        k: Option<String>,
        /// Quoted point `d=..,c=..,cite=..` (repeatable).
        #[arg(long, value_parser = parse_external)]
        external: Vec<ExternalPoint>,
        /// CSV `kind,n,k,d,eps,value,citation`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// C_n(d) against C_{n, round((1-d)n)} as n grows.
    Diag {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        n: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a curve CSV as an SVG line chart.
    Plot {
        /// Input CSV from `curve`.
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kernel cache management.
    #[command(subcommand)]
    Kernel(KernelCommand),
}

#[derive(Debug, Subcommand)]
enum KernelCommand {
    /// Build a kernel and write it to --out or into the cache directory.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        d: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(t) = threads else { return Ok(()) };
    anyhow::ensure!(t > 0, "--threads must be positive");
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads(cli.common.threads)?;
    let common = &cli.common;
    match cli.command {
        Command::Capacity { n, d, k, out } => commands::capacity(common, n, d, k, out.as_deref()),
        Command::Curve { n, d_grid, out } => commands::curve(common, &n, d_grid, out.as_deref()),
        Command::Report { n, d_grid, d, k, external, out } => {
            commands::report(common, n.as_deref(), d_grid, d.as_deref(), k.as_deref(), &external, out.as_deref())
        }
        Command::Diag { d, n, out } => commands::diag(common, d, &n, out.as_deref()),
        Command::Plot { csv, out } => plot::run(&csv, &out).map(|_| 0),
        Command::Kernel(KernelCommand::Build { n, d, k, out }) => commands::kernel_build(common, n, d, k, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
