use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use torsion_cli::scenario::{ideal_shorthand, pair_shorthand, parse_rational, ratio_shorthand};
use torsion_cli::{exit, reproduce, run_scenario, Report, Scenario};
use torsion_core::expansion::{extract_digits, BUDGET_ENV};
use torsion_core::ideals::nestedness_probe;
use torsion_core::verifier::{exception_set, smallness_assessment, trail_checkpoints, trend, VerifyParams};
use torsion_core::Schedule;

#[derive(Parser)]
#[command(name = "torsion", version, about = "Decide and verify ideal-torsion membership for Cantor-series expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the machine-readable JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Step budget for each norm evaluation.
    #[arg(long, global = true, env = BUDGET_ENV)]
    budget: Option<u64>,
    /// Target width of norm enclosures, as a rational such as 1/1000000000.
    #[arg(long, global = true)]
    resolution: Option<String>,
    /// Print the JSON report on stdout instead of the summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Rebuild a built-in example and check its stated outcome.
    Reproduce {
        id: String,
        /// Verification horizons (default 1000 and 10000).
        #[arg(long = "N")]
        horizons: Vec<u64>,
    },
    /// Greedy digits of a rational against a ratio sequence.
    Digits {
        x: String,
        /// An integer b for constant ratio b, `affine`, or a JSON ratio record.
        ratio: String,
        n: u64,
    },
    /// Exception sets of a scenario's digit stream.
    Norms {
        scenario: PathBuf,
        #[arg(long = "eps")]
        eps: Vec<String>,
        #[arg(long = "N")]
        horizon: Option<u64>,
    },
    /// Look for a nested pair whose right ends lie in the ideal while the left ends do not.
    ProbeNested {
        /// fin, d, density:1/2, harmonic, inverse-factorial or wave:3/5.
        ideal: String,
        /// `wave` or `a,b,c/a,b,c[@from]`.
        #[arg(required = true)]
        pairs: Vec<String>,
    },
}

fn emit(cli: &Cli, report: &Report) -> Result<u8> {
    let json = report.to_json();
    if let Some(p) = &cli.report {
        std::fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    if cli.json {
        println!("{json}");
    } else {
        for line in &report.summary {
            println!("{line}");
        }
    }
    Ok(report.exit_code as u8)
}

fn write_json(cli: &Cli, value: &impl serde::Serialize) -> Result<()> {
    if let Some(p) = &cli.report {
        let json = serde_json::to_string_pretty(value)?;
        std::fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run { file } => {
            let sc = Scenario::load(file)?;
            let report = run_scenario(&sc, cli.budget, cli.resolution.as_deref())?;
            emit(cli, &report)
        }
        Command::Reproduce { id, horizons } => {
            let mut params = VerifyParams::default();
            if !horizons.is_empty() {
                params.horizons = horizons.clone();
            }
            if let Some(b) = cli.budget {
                params.precision.budget = b;
            }
            if let Some(r) = &cli.resolution {
                params.precision.resolution = parse_rational(r)?;
            }
            emit(cli, &reproduce(id, &params)?)
        }
        Command::Digits { x, ratio, n } => {
            let ratio = ratio_shorthand(ratio)?;
            let d = extract_digits(&parse_rational(x)?, &ratio, *n)?;
            let digits: Vec<String> =
                d.digits_upto(*n).into_iter().map(|c| c.map_or("?".into(), |c| c.to_string())).collect();
            println!("{}", digits.join(" "));
            if let Some((mu, lambda)) = d.eventual_period() {
                println!("periodic from index {mu} with period {lambda}");
            }
            if let Some(e) = d.support_end() {
                println!("no nonzero digit past index {e}");
            }
            write_json(cli, &serde_json::json!({ "ratio": ratio.to_string(), "digits": digits }))?;
            Ok(exit::OK as u8)
        }
        Command::Norms { scenario, eps, horizon } => {
            let sc = Scenario::load(scenario)?;
            let built = sc.build(cli.budget, cli.resolution.as_deref())?;
            let mut params = built.verify;
            if !eps.is_empty() {
                params.epsilons = eps.iter().map(|e| parse_rational(e)).collect::<Result<_>>()?;
            }
            let n = horizon.or(params.horizons.iter().copied().max()).unwrap_or(1000);
            let schedule = Schedule::new(trail_checkpoints(n));
            let ctx = &built.context;
            let mut reports = Vec::new();
            println!("epsilon\tn\tcount\tvalue\tapprox");
            for e in &params.epsilons {
                let rep = exception_set(&ctx.digits, e, n, &params.precision);
                let small = smallness_assessment(&rep, &ctx.ideal, &schedule);
                for p in &rep.trail {
                    println!("{e}\t{}\t{}\t{}\t{}", p.n, p.count, p.value, p.approx);
                }
                println!(
                    "# ε = {e}: {} members, {} unresolved, smallness {}, trend {}",
                    rep.members.len(),
                    rep.unresolved.len(),
                    small,
                    trend(&ctx.ideal, &small.trail)
                );
                reports.push(serde_json::json!({ "exceptions": rep, "smallness": small }));
            }
            write_json(cli, &reports)?;
            Ok(exit::OK as u8)
        }
        Command::ProbeNested { ideal, pairs } => {
            let ideal = ideal_shorthand(ideal)?;
            let pairs = pairs.iter().map(|p| pair_shorthand(p)).collect::<Result<Vec<_>>>()?;
            let probe = nestedness_probe(&ideal, &pairs, 64);
            println!("{}: {}", ideal.label(), probe.verdict);
            for note in &probe.verdict.notes {
                println!("  {note}");
            }
            if let Some(w) = &probe.witness {
                println!("witness: lefts {} ({}), rights {} ({})", w.pair.lefts, w.lefts, w.pair.rights, w.rights);
            }
            write_json(cli, &probe)?;
            Ok(if probe.verdict.value.is_definitive() { exit::OK } else { exit::UNDECIDED } as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(b) = cli.budget {
        // the core reads its default budget from the environment
        std::env::set_var(BUDGET_ENV, b.to_string());
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::INPUT as u8)
        }
    }
}
