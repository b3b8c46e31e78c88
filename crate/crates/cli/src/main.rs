//! Command-line harness around the sleep-wake AoI/energy library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible problem,
//! 4 oracle-verification failure.

mod commands;
mod output;
mod params;
mod pool;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{OptimizeMode, SimControls};
use output::Format;
use sweep::Sweep;

#[derive(Parser)]
#[command(
    name = "agewake",
    about = "Age-of-information and energy analysis for multi-source sleep-wake servers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonIo {
    /// Input configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args)]
struct SimArgs {
    /// Simulation seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Measured regenerative cycles (after warmup)
    #[arg(long, default_value_t = 200_000)]
    cycles: u64,
    /// Warmup cycles excluded from statistics
    #[arg(long, default_value_t = agewake_core::sim::DEFAULT_WARMUP_CYCLES)]
    warmup: u64,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Sweep axis FIELD=START:STOP:STEP (repeatable)
    #[arg(long = "sweep", value_parser = Sweep::parse)]
    sweeps: Vec<Sweep>,
    /// Worker threads for sweep evaluation
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form metrics for one configuration
    Eval {
        #[command(flatten)]
        io: CommonIo,
    },
    /// Discrete-event simulation of one configuration
    Simulate {
        #[command(flatten)]
        io: CommonIo,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Analytic vs simulated metrics side by side, pass/fail at 3 sigma
    Verify {
        #[command(flatten)]
        io: CommonIo,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Matched-sleep-probability comparison of the three idling schemes
    CompareSchemes {
        #[command(flatten)]
        io: CommonIo,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Energy/PAoI/AoI surfaces over one or two swept fields
    Tradeoff {
        #[command(flatten)]
        io: CommonIo,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Energy minimization under a freshness target
    Optimize {
        #[command(flatten)]
        io: CommonIo,
        /// p3 = single-source closed form; p1-paoi / p1-aoi = enumerate N
        #[arg(long, value_enum)]
        mode: OptimizeMode,
        /// Enumeration cap on N (p1 modes; overrides the config value)
        #[arg(long)]
        n_cap: Option<u32>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Minimal energy under a PAoI cap: LCFS stack vs single buffer
    LcfsCompare {
        #[command(flatten)]
        io: CommonIo,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Stage-I enumeration over the Stage-II equilibrium sampling rates
    Game {
        #[command(flatten)]
        io: CommonIo,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, (i32, anyhow::Error)> {
    let write = |table: &output::Table, io: &CommonIo| -> Result<(), (i32, anyhow::Error)> {
        table
            .write(io.out.as_deref(), io.format)
            .map_err(commands::context_config)
    };
    match cli.command {
        Command::Eval { io } => {
            let cfg = commands::load_config(&io.config)?;
            let table = commands::eval(&cfg)?;
            write(&table, &io)?;
            Ok(0)
        }
        Command::Simulate { io, sim } => {
            let cfg = commands::load_config(&io.config)?;
            let sc = SimControls { seed: sim.seed, cycles: sim.cycles, warmup: sim.warmup };
            let table = commands::run_simulate(&cfg, &sc)?;
            write(&table, &io)?;
            Ok(0)
        }
        Command::Verify { io, sim } => {
            let cfg = commands::load_config(&io.config)?;
            let sc = SimControls { seed: sim.seed, cycles: sim.cycles, warmup: sim.warmup };
            let (table, ok) = commands::verify(&cfg, &sc)?;
            write(&table, &io)?;
            if ok {
                Ok(0)
            } else {
                eprintln!("verification failed: some metric left its 3-sigma band");
                Ok(commands::EXIT_VERIFY)
            }
        }
        Command::CompareSchemes { io, sweep } => {
            let cfg = commands::load_config(&io.config)?;
            let table = commands::compare_schemes(&cfg, &sweep.sweeps, sweep.jobs)?;
            write(&table, &io)?;
            Ok(0)
        }
        Command::Tradeoff { io, sweep } => {
            let cfg = commands::load_config(&io.config)?;
            let table = commands::tradeoff(&cfg, &sweep.sweeps, sweep.jobs)?;
            write(&table, &io)?;
            Ok(0)
        }
        Command::Optimize { io, mode, n_cap, sweep } => {
            let (table, code) =
                commands::optimize(&io.config, mode, n_cap, &sweep.sweeps, sweep.jobs)?;
            write(&table, &io)?;
            Ok(code)
        }
        Command::LcfsCompare { io, sweep } => {
            let (table, code) = commands::lcfs_compare(&io.config, &sweep.sweeps, sweep.jobs)?;
            write(&table, &io)?;
            Ok(code)
        }
        Command::Game { io } => {
            let table = commands::run_game(&io.config)?;
            write(&table, &io)?;
            Ok(0)
        }
    }
}
