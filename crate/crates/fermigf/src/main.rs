//! Command-line interface: compute phase-space curve data for a
//! scenario file, cross-check propagation, compare against the Wigner
//! picture, simulate measurement campaigns, rebuild wave functions, or
//! run the built-in verification suite.
//!
//! Exit codes: 0 success, 1 invalid scenario or arguments, 2 numerical
//! failure during a run, 3 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fermigf::error::{Error, Result};
use fermigf::runner::{
    exit_code, run_curve, run_evolve, run_measure, run_reconstruct, run_verify, run_wigner,
    RunOptions,
};
use fermigf::scenario::Scenario;
use fermigf::verify::ToleranceProfile;

#[derive(Parser)]
#[command(
    name = "fermigf",
    version,
    about = "Phase-space curves of one-dimensional quantum wave packets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario JSON file (required by every command except `verify`).
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Output directory for data files (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Lead CSV rows with the dimensionless column block.
    #[arg(long, global = true)]
    dimensionless: bool,

    /// Override the scenario's random seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Tolerance profile for the verification suite.
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Default)]
    tolerance_profile: ProfileArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Strict,
}

impl From<ProfileArg> for ToleranceProfile {
    fn from(arg: ProfileArg) -> Self {
        match arg {
            ProfileArg::Default => ToleranceProfile::Default,
            ProfileArg::Strict => ToleranceProfile::Strict,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-time curve branches and conic fits.
    Curve,
    /// Propagate with the split-step integrator and compare against the
    /// closed-form states.
    Evolve,
    /// Compute phase-space fields, level contours, and the distance to
    /// the zero-level curve.
    Wigner,
    /// Simulate repeated-preparation measurement campaigns.
    Measure,
    /// Rebuild wave functions from their curves and report round-trip
    /// distances.
    Reconstruct,
    /// Run the built-in verification suite.
    Verify,
}

fn load_scenario(path: &Option<PathBuf>) -> Result<Scenario> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::Scenario("this command requires --scenario <file>".into()))?;
    Scenario::from_file(path)
}

fn run(cli: Cli) -> Result<bool> {
    let options = RunOptions {
        out_dir: cli.out,
        dimensionless: cli.dimensionless,
        seed_override: cli.seed,
        profile: cli.tolerance_profile.into(),
    };
    match cli.command {
        Command::Curve => run_curve(&load_scenario(&cli.scenario)?, &options).map(|_| true),
        Command::Evolve => run_evolve(&load_scenario(&cli.scenario)?, &options).map(|_| true),
        Command::Wigner => run_wigner(&load_scenario(&cli.scenario)?, &options).map(|_| true),
        Command::Measure => run_measure(&load_scenario(&cli.scenario)?, &options).map(|_| true),
        Command::Reconstruct => {
            run_reconstruct(&load_scenario(&cli.scenario)?, &options).map(|_| true)
        }
        Command::Verify => run_verify(&options),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = run(cli);
    match &outcome {
        Ok(false) => eprintln!("verification failed"),
        Err(error) => eprintln!("error: {error}"),
        Ok(true) => {}
    }
    ExitCode::from(exit_code(&outcome))
}
