//! `kgfield`: verification suites, scenarios, sweeps and state inspection.

mod config;
mod error;
mod fields;
mod report;
mod scenario;
mod sweep;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::Format;
use error::ConfigError;
use kgfield::currents::total_probability;
use kgfield::inner::{inner_0, inner_a};
use kgfield::io::{read_state, StateFile};
use kgfield::verify::{self, Bound, CheckResult, VerifyContext, SUITES};
use report::{num, Provenance, Table};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kgfield",
    version,
    about = "Klein-Gordon field numerics: checks, scenarios and sweeps"
)]
struct Cli {
    /// Output directory (KGFIELD_OUT takes precedence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed overriding the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact format overriding the configured ones.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum, hide = true)]
    corrupt: Option<Corruption>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Corruption {
    Omega,
}

#[derive(Subcommand)]
enum Command {
    /// Run the registered invariant checks.
    Verify {
        /// Restrict to one suite.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Run a scenario config.
    Scenario { config: PathBuf },
    /// Run a sweep config.
    Sweep { config: PathBuf },
    /// Field-state files.
    State {
        #[command(subcommand)]
        action: StateAction,
    },
}

#[derive(Subcommand)]
enum StateAction {
    /// Print the header, norms and residuals of a state file.
    Inspect { file: PathBuf },
}

pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

fn run_verify(suite: Option<&str>, cli: &Cli, opts: &RunOptions) -> Result<()> {
    if let Some(s) = suite {
        if !SUITES.contains(&s) {
            return Err(ConfigError::new(format!(
                "unknown suite {s}; expected one of {}",
                SUITES.join(", ")
            ))
            .into());
        }
    }
    let mut ctx = VerifyContext::default();
    if let Some(s) = opts.seed {
        ctx.seed = s;
    }
    if matches!(cli.corrupt, Some(Corruption::Omega)) {
        ctx.corrupt_omega = Some(1.01);
    }
    let results = verify::run(suite, &ctx)?;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        match &r.error {
            Some(e) => println!("{status} {}/{}: error: {e}", r.suite, r.check),
            None => println!(
                "{status} {}/{}: {:.3e} ({} {:.1e})",
                r.suite,
                r.check,
                r.value,
                relation(r.bound),
                r.tolerance
            ),
        }
    }
    let dir = report::output_dir(opts.out.as_deref(), None)?;
    let prov = Provenance {
        config_hash: None,
        seed: ctx.seed,
        params: vec![("suite".into(), suite.unwrap_or("all").into())],
    };
    write_verify_report(&results, &dir, opts.format.unwrap_or(Format::Json), &prov)?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}/{}", r.suite, r.check))
        .collect();
    println!(
        "{} of {} checks passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        bail!("failing checks: {}", failed.join(", "));
    }
    Ok(())
}

fn relation(b: Bound) -> &'static str {
    match b {
        Bound::AtMost => "<=",
        Bound::AtLeast => ">=",
        Bound::Above => ">",
    }
}

fn write_verify_report(
    results: &[CheckResult],
    dir: &std::path::Path,
    format: Format,
    prov: &Provenance,
) -> Result<()> {
    match format {
        Format::Json => report::write_json(
            &dir.join("verify.json"),
            &json!({ "provenance": prov.to_json(), "checks": results }),
        ),
        Format::Csv => {
            let mut t = Table::new(&[
                "suite",
                "check",
                "value",
                "tolerance",
                "bound",
                "passed",
                "error",
            ]);
            for r in results {
                t.push(vec![
                    json!(r.suite),
                    json!(r.check),
                    num(r.value),
                    num(r.tolerance),
                    serde_json::to_value(r.bound)?,
                    json!(r.passed),
                    json!(r.error.clone().unwrap_or_default()),
                ]);
            }
            t.write(dir, "verify", &[Format::Csv], prov).map(|_| ())
        }
    }
}

fn inspect(file: &std::path::Path, format: Option<Format>) -> Result<()> {
    let f = std::fs::File::open(file)
        .map_err(|e| ConfigError::new(format!("{}: {e}", file.display())))?;
    let state = read_state(std::io::BufReader::new(f))
        .with_context(|| format!("reading {}", file.display()))?;
    let info = match &state {
        StateFile::Lattice { field, localized } => {
            let (lat, p, t0) = (field.lattice(), field.params(), field.t0());
            let (plus, minus) = field.energy_split();
            json!({
                "kind": "lattice",
                "dimension": lat.dim(),
                "L": lat.lengths(),
                "N": lat.counts(),
                "M": p.m(),
                "kappa": p.kappa(),
                "a": p.a(),
                "t0": t0,
                "localized": localized,
                "norm_a": num(inner_a(field, field, t0)?.re),
                "norm_0": num(inner_0(field, field, t0)?.re),
                "positive_energy_norm_0": num(inner_0(&plus, &plus, t0)?.re),
                "negative_energy_norm_0": num(inner_0(&minus, &minus, t0)?.re),
                "total_probability": num(total_probability(field, t0)?),
                "kg_residual": num(field.kg_residual(t0)),
                "foldy_residual": num(field.foldy_residual(t0)),
                "reality_defect": num(field.reality_defect()),
                "max_coefficient": num(field.max_coeff()),
            })
        }
        StateFile::PlaneWave(pw) => {
            let p = pw.params();
            json!({
                "kind": "planewave",
                "dimension": pw.dim(),
                "M": p.m(),
                "kappa": p.kappa(),
                "a": p.a(),
                "modes": pw.modes(),
                "omegas": pw.modes().iter().map(|m| num(pw.omega(m))).collect::<Vec<_>>(),
            })
        }
    };
    match format {
        Some(Format::Json) => println!("{}", serde_json::to_string_pretty(&info)?),
        _ => {
            if let serde_json::Value::Object(map) = &info {
                for (k, v) in map {
                    println!("{k} = {v}");
                }
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let opts = RunOptions {
        out: cli.out.clone(),
        workers: cli.workers,
        seed: cli.seed,
        format: cli.format,
    };
    match &cli.command {
        Command::Verify { suite } => run_verify(suite.as_deref(), cli, &opts),
        Command::Scenario { config } => scenario::run(config, &opts),
        Command::Sweep { config } => sweep::run(config, &opts),
        Command::State {
            action: StateAction::Inspect { file },
        } => inspect(file, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error::exit_status(&e))
        }
    }
}
