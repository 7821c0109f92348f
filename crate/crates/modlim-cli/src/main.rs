//! `modlim` — conformal moduli of graph domains from the command line.
//!
//! Subcommands: `domain validate`, `modulus`, `sweep eps`, `sweep eta`,
//! `sandwich`, `asymptotics`, `lsc-approx`.  Exit codes are a stable
//! contract: 0 success, 1 I/O or parse failure, 2 invalid domain, 3 solver
//! or property failure, 4 quadrature failure, 64 usage.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::ModulusParams;

#[derive(Parser)]
#[command(
    name = "modlim",
    version,
    about = "Conformal moduli of graph domains: exact vertical families, a \
             certified discrete solver, and limit experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect and validate domain description files
    Domain {
        #[command(subcommand)]
        cmd: DomainCmd,
    },
    /// Compute one modulus (vertical family, discrete solver, or analytic
    /// quadrilateral)
    Modulus(ModulusArgs),
    /// Convergence sweeps writing CSV + SVG + summary + manifest
    Sweep {
        #[command(subcommand)]
        cmd: SweepCmd,
    },
    /// Check the two-sided estimate: vertical modulus vs compression limit
    /// vs width-restricted limit
    Sandwich(ConfigRunArgs),
    /// Tabulate quadrilateral moduli of degenerating triples against the
    /// two-term cross-ratio estimate
    Asymptotics(AsymptoticsArgs),
    /// Approximate a step profile from below by Lipschitz inf-convolutions
    LscApprox(LscApproxArgs),
}

#[derive(Subcommand)]
enum DomainCmd {
    /// Parse a domain file and report kind, interval, area, and the
    /// lower-semicontinuity verdict
    Validate { path: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact modulus of the vertical-segment family
    Vertical,
    /// Certified grid solver for the full curve family
    Discrete,
    /// Closed-form quadrilateral modulus of a half-plane boundary triple
    AnalyticQuad,
}

#[derive(Args)]
struct ModulusArgs {
    /// What to compute
    #[arg(long, value_enum)]
    mode: Mode,
    /// Domain file (vertical/discrete) or three boundary points w1 w2 w3
    /// (analytic-quad)
    args: Vec<String>,
    /// Boundary quadruple as four prime-end tokens `a b c d` (a, b bottom;
    /// c, d top; token = `X` or `X:left` / `X:right` at a wall); defaults
    /// to the full bottom and top edges
    #[arg(long, num_args = 4)]
    quad: Option<Vec<String>>,
    /// Grid cell size (discrete mode)
    #[arg(long, default_value_t = 0.02)]
    h: f64,
    /// Relative duality-gap tolerance (discrete mode)
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Restrict to curves of horizontal extent below eta (discrete mode)
    #[arg(long)]
    eta: Option<f64>,
    /// Constraint-generation round limit (discrete mode)
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// RNG seed (extremality verification and solver tie-breaking)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verify the extremality criterion of the canonical density
    /// (vertical mode)
    #[arg(long)]
    verify: bool,
    /// Write the solved density as density.csv into --out (discrete mode)
    #[arg(long)]
    dump_density: bool,
    /// Output directory for dumped files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Vertical-compression sweep: solve at each eps and extrapolate
    /// eps x modulus to the vertical-family target
    Eps(ConfigRunArgs),
    /// Width-restriction sweep: restricted modulus per eta at fixed h
    Eta(ConfigRunArgs),
}

#[derive(Args)]
struct ConfigRunArgs {
    /// Experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV / SVG / summary / manifest
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// RNG seed recorded in the manifest
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AsymptoticsArgs {
    /// Comma-separated interior points w2 of the triples (0, w2, 1),
    /// strictly increasing
    #[arg(long, value_delimiter = ',', required = true)]
    w2: Vec<f64>,
    /// Output directory (when given, writes CSV + summary + manifest)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed recorded in the manifest
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LscApproxArgs {
    /// Step-profile domain file
    path: PathBuf,
    /// Comma-separated Lipschitz constants n of the approximants
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<f64>,
    /// Output directory (when given, writes CSV + approximant JSON +
    /// summary + manifest)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed recorded in the manifest
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    match cli.cmd {
        Cmd::Domain {
            cmd: DomainCmd::Validate { path },
        } => commands::domain_validate(&path),
        Cmd::Modulus(a) => commands::modulus(&ModulusParams {
            mode: a.mode,
            args: a.args,
            quad: a.quad,
            h: a.h,
            tol: a.tol,
            eta: a.eta,
            max_iter: a.max_iter,
            seed: a.seed,
            verify: a.verify,
            dump_density: a.dump_density,
            out: a.out,
        }),
        Cmd::Sweep {
            cmd: SweepCmd::Eps(a),
        } => commands::sweep_eps(&a.config, &a.out, a.seed),
        Cmd::Sweep {
            cmd: SweepCmd::Eta(a),
        } => commands::sweep_eta(&a.config, &a.out, a.seed),
        Cmd::Sandwich(a) => commands::sandwich(&a.config, &a.out, a.seed),
        Cmd::Asymptotics(a) => commands::asymptotics(&a.w2, a.out.as_deref(), a.seed),
        Cmd::LscApprox(a) => commands::lsc_approx(&a.path, &a.n, a.out.as_deref(), a.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(64)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
