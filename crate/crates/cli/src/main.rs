mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapmodes::interface::DislocationMode;

use config::Grid;

#[derive(Parser, Debug)]
#[command(name = "gapmodes", version, about = "Spectral gaps and interface eigenvalues of periodic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Potential descriptor: a JSON file, or inline JSON starting with `{`.
    #[arg(long, global = true)]
    pub potential: Option<String>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Tolerance profile (`default`, `fast`, `strict`) or a JSON file of overrides.
    #[arg(long, global = true, default_value = "default")]
    pub tol: String,

    /// Seed of the finite-difference inverse iteration.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,

    /// Worker threads for scans; all cores when absent.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Symmetric,
    OneSided,
}

impl From<ModeArg> for DislocationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Symmetric => DislocationMode::Symmetric,
            ModeArg::OneSided => DislocationMode::OneSided,
        }
    }
}

/// Which interface operator to build from the base potential.
#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Right half-line potential for a two-potential interface.
    #[arg(long)]
    pub right: Option<String>,

    /// Additive jump: `V₀` on the left, `V₀ + α` on the right.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    /// Dislocation shift.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,

    #[arg(long, value_enum, default_value = "symmetric")]
    pub mode: ModeArg,
}

#[derive(Args, Debug, Clone)]
pub struct FdArgs {
    /// Half width of the finite-difference domain in periods.
    #[arg(long, default_value_t = 40)]
    pub half_width_periods: usize,

    #[arg(long, default_value_t = 200)]
    pub points_per_period: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Band edges s₁, s₂, … labeled by their boundary problem.
    Bands {
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
    },
    /// Spectral gaps with edge labels and polarity.
    Gaps {
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
    },
    /// The first Dirichlet and Neumann eigenvalues on one period.
    BoundaryEigs {
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// R(t;λ) sampled across one gap.
    RatioProfile {
        #[arg(long, default_value_t = 1)]
        gap: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Localized eigenvalues of one interface operator.
    Interface {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        /// Also write the assembled eigenfunctions here.
        #[arg(long)]
        psi_out: Option<PathBuf>,
    },
    /// Eigenvalues of V₀ | V₀ + α over an α grid.
    AdditiveScan {
        /// α grid, `lo:hi:step`.
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3:0.05")]
        grid: Grid,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
    },
    /// Dislocation eigenvalues over a t grid (64 points over one period by default).
    DislocationScan {
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: ModeArg,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<Grid>,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
    },
    /// Finite-difference eigenvalues of one interface operator.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        fd: FdArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        /// Keep boundary artifacts in the output.
        #[arg(long)]
        all: bool,
    },
    /// Cross-checks solver, oracle and count predictions; nonzero exit on disagreement.
    Verify {
        /// α grid of the additive suite.
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3:0.5")]
        grid: Grid,
        /// Number of t values per dislocation mode.
        #[arg(long, default_value_t = 16)]
        t_points: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        #[command(flatten)]
        fd: FdArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands { .. } => "bands",
            Command::Gaps { .. } => "gaps",
            Command::BoundaryEigs { .. } => "boundary-eigs",
            Command::RatioProfile { .. } => "ratio-profile",
            Command::Interface { .. } => "interface",
            Command::AdditiveScan { .. } => "additive-scan",
            Command::DislocationScan { .. } => "dislocation-scan",
            Command::Oracle { .. } => "oracle",
            Command::Verify { .. } => "verify",
        }
    }
}

fn run(cli: Cli) -> config::CliResult<()> {
    let ctx = commands::Context::new(&cli.common)?;
    match cli.command {
        Command::Bands { lambda_max } => commands::bands(&ctx, lambda_max),
        Command::Gaps { lambda_max } => commands::gaps(&ctx, lambda_max),
        Command::BoundaryEigs { count } => commands::boundary_eigs(&ctx, count),
        Command::RatioProfile { gap, t, samples } => commands::ratio_profile(&ctx, gap, t, samples),
        Command::Interface {
            problem,
            lambda_max,
            psi_out,
        } => commands::interface(&ctx, &problem, lambda_max, psi_out.as_deref()),
        Command::AdditiveScan { grid, lambda_max } => commands::additive_scan(&ctx, grid, lambda_max),
        Command::DislocationScan { mode, grid, lambda_max } => {
            commands::dislocation_scan(&ctx, mode.into(), grid, lambda_max)
        }
        Command::Oracle {
            problem,
            fd,
            lambda_max,
            all,
        } => commands::oracle(&ctx, &problem, &fd, lambda_max, all),
        Command::Verify {
            grid,
            t_points,
            lambda_max,
            fd,
        } => verify::run(&ctx, grid, t_points, lambda_max, &fd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic(name));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
