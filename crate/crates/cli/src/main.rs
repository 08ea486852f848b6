use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use randbeam_cli::context::default_cache_dir;
use randbeam_cli::{commands, exit_code, Common, FigureId, Overrides};

/// Rates, simulations and figure data for random-beamforming downlinks.
#[derive(Parser, Debug)]
#[command(name = "randbeam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed for Monte Carlo work
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for the CSV and JSON outputs
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Number of Monte Carlo drops
    #[arg(long, global = true)]
    drops: Option<u64>,

    /// Relative quadrature tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Where the mixing-coefficient cache lives
    #[arg(long, global = true, env = "RANDBEAM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic individual sum rates over a parameter grid
    RateTable,
    /// Monte Carlo run of one system
    Simulate,
    /// Large-K scaling ratios and Gumbel diagnostics
    Scaling,
    /// Data for one of the reference figures
    Figure {
        /// fig1, fig2, fig4, fig5 or fig6
        id: FigureId,
    },
    /// Run every acceptance check; exits 1 if any fails
    Validate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = Common {
        config: cli.config,
        out: cli.out,
        overrides: Overrides {
            seed: cli.seed,
            drops: cli.drops,
            tol: cli.tol,
        },
        cache_dir: cli.cache_dir.or_else(default_cache_dir),
    };
    let result = match cli.command {
        Command::RateTable => commands::rate_table(&common),
        Command::Simulate => commands::simulate(&common),
        Command::Scaling => commands::scaling(&common),
        Command::Figure { id } => commands::figure(&common, id),
        Command::Validate => commands::validate(&common),
    };
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
