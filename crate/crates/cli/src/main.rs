use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iic_cli::{run_check, run_fuzz, FuzzParams, Method, RunConfig};
use iic_core::engine::{Fault, DEFAULT_STEP_BUDGET};
use iic_core::gen::Bounds;

/// Coverability checker for Petri nets.
#[derive(Parser)]
#[command(name = "iic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the target of a .spec file is coverable.
    Check(CheckArgs),
    /// Cross-check both engines on seeded random instances.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Iic)]
    method: Method,
    /// Write the inductive invariant of a safe verdict here.
    #[arg(long, value_name = "PATH")]
    cert: Option<PathBuf>,
    /// Write the firing sequence of an unsafe verdict here.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Maximum number of rule applications.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_STEP_BUDGET)]
    budget: u64,
    /// Log every rule application to stderr.
    #[arg(short, long)]
    verbose: bool,
    /// Print frame, blocker and obligation counters.
    #[arg(long)]
    stats: bool,
    /// Skip validating the verdict before printing it.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 500)]
    count: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Maximum number of places.
    #[arg(long, default_value_t = 6)]
    places: usize,
    /// Maximum number of transitions.
    #[arg(long, default_value_t = 6)]
    trans: usize,
    /// Maximum arc weight.
    #[arg(long, default_value_t = 2)]
    weight: u32,
    /// Maximum initial tokens per place.
    #[arg(long, default_value_t = 3)]
    tokens: u32,
    /// Also compare against bounded forward exploration.
    #[arg(long)]
    enum_oracle: bool,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_STEP_BUDGET)]
    budget: u64,
    /// Worker threads (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    OverBlock,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Check(a) => {
            let cfg = RunConfig {
                input: a.file,
                method: a.method,
                cert: a.cert,
                trace: a.trace,
                verbose: a.verbose,
                stats: a.stats,
                verify: !a.no_verify,
                budget: a.budget,
                ..RunConfig::default()
            };
            run_check(&cfg, &mut out, &mut err)
        }
        Command::Fuzz(a) => {
            let cfg = RunConfig {
                budget: a.budget,
                fuzz: FuzzParams {
                    count: a.count,
                    seed: a.seed,
                    bounds: Bounds {
                        places: a.places,
                        transitions: a.trans,
                        weight: a.weight,
                        tokens: a.tokens,
                    },
                    enum_oracle: a.enum_oracle,
                    jobs: a.jobs,
                    fault: a.inject_fault.map(|f| match f {
                        FaultArg::OverBlock => Fault::OverBlock,
                    }),
                },
                ..RunConfig::default()
            };
            run_fuzz(&cfg, &mut out, &mut err)
        }
    };
    ExitCode::from(code)
}
