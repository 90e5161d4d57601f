//! Batch harness over `pouw-core`: scenario files in, tables / CSV / SVG out.

pub mod commands;
pub mod numfmt;
pub mod report;
pub mod scenario_file;
pub mod svg;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use scenario_file::EntropyBase;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_BOUND: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "pouw",
    version,
    about = "Equilibrium solver for useful-work mining games"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Write machine-readable CSV here.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Write an SVG chart here (sweep only).
    #[arg(long, global = true, value_name = "PATH")]
    pub svg: Option<PathBuf>,

    /// Entropy base, `e` or a number > 1. Overrides the scenario file.
    #[arg(long, global = true, value_name = "e|NUMBER")]
    pub base: Option<EntropyBase>,

    /// Seed for the multi-start dynamics in `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, global = true)]
    pub h_max: Option<f64>,

    #[arg(long, global = true)]
    pub fp_tol: Option<f64>,

    #[arg(long, global = true)]
    pub foc_tol: Option<f64>,

    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the equilibrium and print the per-miner table.
    Solve { scenario: PathBuf },

    /// Solve, then cross-check against numeric best responses and dynamics.
    Verify { scenario: PathBuf },

    /// Optimal coupon schedule for a single miner over several blocks.
    Schedule {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        budget: f64,
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        rho: f64,
    },

    /// Entropy of the equilibrium and its coupon / cost decomposition.
    Decentralization { scenario: PathBuf },

    /// Solve once per value of a swept parameter.
    Sweep {
        scenario: PathBuf,

        /// rho, r0, miner.<id>.alpha or miner.<id>.beta
        #[arg(long, value_name = "PARAM")]
        param: String,

        /// Comma-separated list of values.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1..,
            conflicts_with_all = ["from", "to", "steps"],
            required_unless_present = "from"
        )]
        values: Vec<f64>,

        #[arg(long, requires_all = ["to", "steps"])]
        from: Option<f64>,

        #[arg(long, requires = "from")]
        to: Option<f64>,

        #[arg(long, requires = "from")]
        steps: Option<usize>,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match commands::dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
