//! Subcommand implementations.

use anyhow::Context;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qxot::attack::{
    honest_alice_baseline, run_cheat_alice, AttackResult, AttackTarget, CheatAliceConfig,
};
use qxot::he::he_keygen;
use qxot::interactive::{run_interactive, CliffordTCircuit, RunOptions};
use qxot::leakage::{format_sig9, make_report, BobStrategy, Prior, ScenarioSpec};
use qxot::linear::{inner_product, run_p3, run_p3_he};
use qxot::qsim::Ket;
use qxot::xot::{run_xot, XotVariant};

use crate::config::{parse_bit_pair, parse_bits, RunContext, UsageError};

#[derive(Args)]
pub struct XotArgs {
    /// Protocol variant: p1, p2, or p2b.
    #[arg(long, default_value = "p1")]
    variant: XotVariant,
    /// Alice's two input bits, e.g. "10".
    #[arg(long)]
    x: String,
    /// Bob's two input bits, e.g. "11".
    #[arg(long)]
    y: String,
    /// Number of independent runs (seeds seed..seed+runs-1).
    #[arg(long, default_value_t = 1)]
    runs: u64,
}

pub fn cmd_xot(ctx: &RunContext, args: &XotArgs) -> anyhow::Result<()> {
    let x = parse_bit_pair(&args.x)?;
    let y = parse_bit_pair(&args.y)?;
    let expected = (x.0 & y.0) ^ (x.1 & y.1);

    if args.runs <= 1 {
        let run = run_xot(args.variant, x, y, ctx.seed)?;
        println!(
            "xot {}: output {} (expected {}) correct",
            args.variant, run.output, expected
        );
        let name = format!("xot_{}_seed{}.json", args.variant, ctx.seed);
        let path = ctx.write_json(&name, &run.to_json())?;
        println!("transcript written to {}", path.display());
        return Ok(());
    }

    let seeds: Vec<u64> = (ctx.seed..ctx.seed + args.runs).collect();
    let runs = parallel_map(ctx.jobs, &seeds, |&seed| run_xot(args.variant, x, y, seed))?;
    let outputs: Vec<u8> = runs.iter().map(|r| r.output).collect();
    let all_correct = outputs.iter().all(|&o| o == expected);
    println!(
        "xot {}: {} runs, {} correct",
        args.variant,
        runs.len(),
        outputs.iter().filter(|&&o| o == expected).count()
    );
    let summary = serde_json::json!({
        "command": "xot",
        "variant": args.variant,
        "seed": ctx.seed,
        "runs": args.runs,
        "x": [x.0, x.1],
        "y": [y.0, y.1],
        "outputs": outputs,
        "all_correct": all_correct,
    });
    let name = format!(
        "xot_{}_sweep_seed{}_runs{}.json",
        args.variant, ctx.seed, args.runs
    );
    let path = ctx.write_json(&name, &summary)?;
    println!("summary written to {}", path.display());
    if !all_correct {
        return Err(qxot::Error::InternalCheck("sweep contained incorrect outputs".into()).into());
    }
    Ok(())
}

#[derive(Args)]
pub struct LinearArgs {
    /// Subprocedure variant: p1, p2, or p2b.
    #[arg(long, default_value = "p1")]
    variant: XotVariant,
    /// Alice's 2n input bits, e.g. "1101".
    #[arg(long)]
    x: String,
    /// Bob's 2n input bits, e.g. "1011".
    #[arg(long)]
    y: String,
    /// Route Bob's outcome bits through XOR-homomorphic encryption.
    #[arg(long)]
    he: bool,
    /// Prime size for the encryption keys (bits).
    #[arg(long)]
    prime_bits: Option<usize>,
    /// Split Bob's input into this many XOR shares and run once per share,
    /// XORing the outputs.
    #[arg(long, default_value_t = 1)]
    y_shares: u64,
}

pub fn cmd_linear(ctx: &RunContext, args: &LinearArgs) -> anyhow::Result<()> {
    let x = parse_bits(&args.x)?;
    let y = parse_bits(&args.y)?;
    if x.len() != y.len() || x.is_empty() || x.len() % 2 != 0 {
        return Err(UsageError(format!(
            "inputs must be equal even lengths, got {} and {}",
            x.len(),
            y.len()
        ))
        .into());
    }
    if args.he && args.variant == XotVariant::P2b {
        return Err(qxot::Error::UnsupportedVariant {
            variant: "p2b".into(),
            operation: "homomorphic-encryption hybrid".into(),
        }
        .into());
    }
    let expected = inner_product(&x, &y);

    if args.y_shares > 1 {
        return run_linear_shared(ctx, args, &x, &y, expected);
    }

    let (record, audit) = if args.he {
        let prime_bits = args.prime_bits.or(ctx.prime_bits).unwrap_or(16);
        let mut key_rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x6865_6b65_7973); // independent key stream
        let keys = he_keygen(prime_bits, &mut key_rng)?;
        let (run, audit) = run_p3_he(&x, &y, args.variant, &keys, ctx.seed)?;
        (run, Some(audit))
    } else {
        (run_p3(&x, &y, args.variant, ctx.seed)?, None)
    };

    println!(
        "linear ({}): output {} = <x,y> mod 2 (expected {}) correct",
        args.variant, record.output, expected
    );
    if let Some(audit) = &audit {
        println!(
            "he audit: bob saw {} plaintext bit(s); {} ciphertexts shipped",
            audit.bob_plaintext_view.len(),
            audit.ciphertexts_sent
        );
    }
    let mut value = record.to_json();
    if let Some(audit) = audit {
        value["he_audit"] = serde_json::to_value(audit)?;
    }
    let suffix = if args.he { "_he" } else { "" };
    let name = format!("linear{}_seed{}.json", suffix, ctx.seed);
    let path = ctx.write_json(&name, &value)?;
    println!("record written to {}", path.display());
    Ok(())
}

/// Repeats the run with Bob's input split into XOR shares; the XOR of the
/// per-share outputs reconstructs the polynomial value.
fn run_linear_shared(
    ctx: &RunContext,
    args: &LinearArgs,
    x: &[u8],
    y: &[u8],
    expected: u8,
) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x7368_6172_6573);
    let mut shares: Vec<Vec<u8>> = (1..args.y_shares)
        .map(|_| (0..y.len()).map(|_| rng.gen_range(0..2u8)).collect())
        .collect();
    let mut last: Vec<u8> = y.to_vec();
    for share in &shares {
        for (l, s) in last.iter_mut().zip(share) {
            *l ^= s;
        }
    }
    shares.push(last);

    let mut combined = 0u8;
    let mut outputs = Vec::new();
    for (i, share) in shares.iter().enumerate() {
        let run = run_p3(x, share, args.variant, ctx.seed + i as u64)?;
        combined ^= run.output;
        outputs.push(run.output);
    }
    if combined != expected {
        return Err(
            qxot::Error::InternalCheck("share-combined output mismatch".into()).into(),
        );
    }
    println!(
        "linear ({}, {} shares): output {} (expected {}) correct",
        args.variant, args.y_shares, combined, expected
    );
    let summary = serde_json::json!({
        "command": "linear",
        "variant": args.variant,
        "seed": ctx.seed,
        "y_shares": args.y_shares,
        "share_outputs": outputs,
        "output": combined,
    });
    let name = format!("linear_shares{}_seed{}.json", args.y_shares, ctx.seed);
    let path = ctx.write_json(&name, &summary)?;
    println!("summary written to {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct AttackArgs {
    /// Evaluate the coherent-key cheating preparation.
    #[arg(long, conflicts_with = "honest_alice")]
    cheat_alice: bool,
    /// Evaluate the honest-Alice Bayesian baseline.
    #[arg(long)]
    honest_alice: bool,
    /// Which quantity the protocol output reveals: y1, y2, or xor.
    #[arg(long, default_value = "xor")]
    target: String,
    /// Protocol variant under attack.
    #[arg(long, default_value = "p1")]
    variant: XotVariant,
    /// Skip entangling the filler qubit with its key register.
    #[arg(long)]
    no_entangle_third: bool,
}

pub fn cmd_attack(ctx: &RunContext, args: &AttackArgs) -> anyhow::Result<()> {
    if !args.cheat_alice && !args.honest_alice {
        return Err(UsageError("pass --cheat-alice or --honest-alice".into()).into());
    }
    let target: AttackTarget = args.target.parse()?;
    let (mode, result): (&str, AttackResult) = if args.cheat_alice {
        let mut config = CheatAliceConfig::new(target, args.variant, !args.no_entangle_third);
        config.fixed_s3 = 0;
        ("cheat", run_cheat_alice(&config)?)
    } else {
        if args.variant != XotVariant::P1 {
            return Err(qxot::Error::UnsupportedVariant {
                variant: args.variant.to_string(),
                operation: "honest baseline".into(),
            }
            .into());
        }
        ("honest", honest_alice_baseline(target)?)
    };
    println!("avg success {:.9}", result.average_success);
    let name = format!("attack_{}_{}.json", mode, args.target.to_lowercase());
    let path = ctx.write_json(&name, &serde_json::to_value(&result)?)?;
    println!("result written to {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct LeakageArgs {
    /// Number of subprocedure instances (dense cap: 3).
    #[arg(long)]
    n: usize,
    /// Input prior: uniform, all-equal, or `point:<bits>`.
    #[arg(long, default_value = "uniform")]
    prior: String,
    /// Comma-separated strategies: z, bell, holevo.
    #[arg(long, default_value = "z,bell,holevo")]
    strategies: String,
    /// Scenario identifier used in file names and the CSV.
    #[arg(long, default_value = "scenario")]
    id: String,
}

fn parse_prior(s: &str, n: usize) -> anyhow::Result<Prior> {
    match s {
        "uniform" => Ok(Prior::Uniform),
        "all-equal" | "all_pairs_equal" => Ok(Prior::AllPairsEqual),
        other => {
            if let Some(bits) = other.strip_prefix("point:") {
                let x = parse_bits(bits)?;
                if x.len() != 2 * n {
                    return Err(UsageError(format!(
                        "point prior needs {} bits, got {}",
                        2 * n,
                        x.len()
                    ))
                    .into());
                }
                Ok(Prior::Point(x))
            } else {
                Err(UsageError(format!("unknown prior '{other}'")).into())
            }
        }
    }
}

pub fn cmd_leakage(ctx: &RunContext, args: &LeakageArgs) -> anyhow::Result<()> {
    let prior = parse_prior(&args.prior, args.n)?;
    let strategies = args
        .strategies
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<BobStrategy>().map_err(Into::into))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let spec = ScenarioSpec {
        id: args.id.clone(),
        n: args.n,
        prior,
        strategies,
    };
    let report = make_report(&spec).context("building leakage report")?;

    for (name, bits) in &report.strategy_bits {
        println!("{name} {}", format_sig9(*bits));
        if *bits > report.holevo_bits + ctx.tolerances.prob.max(1e-9) {
            return Err(qxot::Error::InternalCheck(format!(
                "{name} exceeds the Holevo bound"
            ))
            .into());
        }
    }
    println!("holevo {}", format_sig9(report.holevo_bits));
    println!("secret_entropy {}", format_sig9(report.entropy_of_secret));

    let csv_path = ctx.write_text(&format!("leakage_{}.csv", args.id), &report.to_csv())?;
    let json_path = ctx.write_json(
        &format!("leakage_{}.json", args.id),
        &serde_json::to_value(&report)?,
    )?;
    println!("report written to {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

#[derive(Args)]
pub struct QcArgs {
    /// Circuit file: one gate per line, `---` between stages.
    #[arg(long)]
    circuit: std::path::PathBuf,
    /// Input product state: "zeros" or "plus".
    #[arg(long, default_value = "plus")]
    input: String,
    /// Evaluate each stage's correction forms with one shared Bob key.
    #[arg(long)]
    batch: bool,
}

pub fn cmd_qc(ctx: &RunContext, args: &QcArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.circuit)
        .map_err(|e| UsageError(format!("cannot read circuit {:?}: {e}", args.circuit)))?;
    let circuit = CliffordTCircuit::parse(&text)?;
    let input = match args.input.as_str() {
        "zeros" => Ket::zero(circuit.num_qubits)?,
        "plus" => {
            let mut s = Ket::plus_minus(0);
            for _ in 1..circuit.num_qubits {
                s = s.tensor(&Ket::plus_minus(0))?;
            }
            s
        }
        other => return Err(UsageError(format!("unknown input '{other}'")).into()),
    };
    let options = RunOptions {
        batch_corrections: args.batch,
    };
    let (_, log) = run_interactive(&input, &circuit, ctx.seed, options)?;
    println!("fidelity {:.9}", log.fidelity);
    println!(
        "stages {}, teleports {}, linear evaluations {}",
        log.num_stages,
        log.teleports.len(),
        log.p3_calls.len()
    );
    let name = format!("qc_seed{}.json", ctx.seed);
    let path = ctx.write_json(&name, &serde_json::to_value(&log)?)?;
    println!("run log written to {}", path.display());
    Ok(())
}

/// Runs `f` over `items` on a bounded worker pool, preserving order.
fn parallel_map<T, U, F>(jobs: usize, items: &[T], f: F) -> anyhow::Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> qxot::Result<U> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    let results: Vec<qxot::Result<U>> =
        pool.install(|| items.par_iter().map(&f).collect());
    results
        .into_iter()
        .collect::<qxot::Result<Vec<U>>>()
        .map_err(Into::into)
}
