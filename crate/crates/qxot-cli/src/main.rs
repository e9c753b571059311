//! Experiment runner for the XOT protocol simulator.
//!
//! Subcommands: `xot` (single oblivious-transfer runs), `linear`
//! (linear polynomial evaluation, optionally under XOR-homomorphic
//! encryption), `attack` (cheating-Alice evaluation), `leakage`
//! (information reports), `qc` (interactive two-party circuit evaluation).
//!
//! Every command requires a seed (flag, config file, or `QXOT_SEED`) and
//! writes byte-stable report files: identical config and seed give
//! identical bytes.
//!
//! Exit codes: 0 success, 2 usage error, 3 resource cap exceeded,
//! 4 invariant violation.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};

use crate::config::RunContext;

#[derive(Parser)]
#[command(name = "qxot", version, about = "XOT protocol simulator and analyzer")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// RNG seed; falls back to the config file, then to $QXOT_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out_dir: Option<std::path::PathBuf>,
    /// Worker threads for parallel independent runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one XOT instance (or a seed sweep with --runs).
    Xot(commands::XotArgs),
    /// Evaluate a linear polynomial modulo 2.
    Linear(commands::LinearArgs),
    /// Evaluate the cheating-Alice strategy or the honest baseline.
    Attack(commands::AttackArgs),
    /// Compute leakage reports for Bob's view of a linear evaluation.
    Leakage(commands::LeakageArgs),
    /// Run the interactive two-party circuit evaluation.
    Qc(commands::QcArgs),
}

fn main() {
    let cli = Cli::parse();
    let ctx = match RunContext::build(&cli.common) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let result = match cli.command {
        Command::Xot(args) => commands::cmd_xot(&ctx, &args),
        Command::Linear(args) => commands::cmd_linear(&ctx, &args),
        Command::Attack(args) => commands::cmd_attack(&ctx, &args),
        Command::Leakage(args) => commands::cmd_leakage(&ctx, &args),
        Command::Qc(args) => commands::cmd_qc(&ctx, &args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code_for(&e));
        }
    }
}

/// Maps failures onto the documented exit-code contract.
fn exit_code_for(e: &anyhow::Error) -> i32 {
    use qxot::Error as QErr;
    if let Some(q) = e.downcast_ref::<QErr>() {
        return match q {
            QErr::TooLarge { .. } | QErr::TooManyQubits(_) => 3,
            QErr::LengthMismatch { .. }
            | QErr::InvalidBit(_)
            | QErr::UnsupportedVariant { .. }
            | QErr::PrimeBitsTooSmall(_)
            | QErr::InvalidCircuit(_)
            | QErr::OutOfRange { .. }
            | QErr::InvalidAttack(_) => 2,
            _ => 4,
        };
    }
    if e.downcast_ref::<config::UsageError>().is_some() {
        return 2;
    }
    4
}
