use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grand_cli::{
    cmd_compare, cmd_conjecture, cmd_fluid, cmd_optimal, cmd_simulate, CmdError, Scenario,
};

/// Simulator and numerical toolkit for greedy-randomized (GRAND) packing
/// policies: event-driven simulation, fluid-limit ODEs, and optimal
/// operating points.
#[derive(Parser)]
#[command(name = "grand", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides the scenario's `out` field.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the scenario's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded stochastic simulations and write trajectories.
    Simulate(RunArgs),
    /// Integrate the fluid-limit ODE for one or more values of `a`.
    Fluid(RunArgs),
    /// Solve the LP optimum and sweep the entropy program over `a`.
    Optimal(RunArgs),
    /// Compare a simulation against the matching fluid path.
    Compare(RunArgs),
    /// Tabulate stationary distances to the optimal set for GRAND(0)/GRAND(Z^p).
    Conjecture(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Fluid(a)
            | Command::Optimal(a)
            | Command::Compare(a)
            | Command::Conjecture(a) => a,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    let args = cli.command.args();
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seeds = Some(vec![seed]);
    }
    let out = args
        .out
        .clone()
        .or_else(|| scenario.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    match &cli.command {
        Command::Simulate(_) => cmd_simulate(&scenario, &out, args.quiet).map(drop),
        Command::Fluid(_) => cmd_fluid(&scenario, &out, args.quiet).map(drop),
        Command::Optimal(_) => cmd_optimal(&scenario, &out, args.quiet).map(drop),
        Command::Compare(_) => cmd_compare(&scenario, &out, args.quiet).map(drop),
        Command::Conjecture(_) => cmd_conjecture(&scenario, &out, args.quiet).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
