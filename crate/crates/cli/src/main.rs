use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use entmeasure_cli::curve::{curve_csv, curve_points, Curve};
use entmeasure_cli::scatter::{
    parse_scatter, run_scatter, self_check, write_scatter, Pair, RankChoice, ScatterConfig,
};
use entmeasure_cli::verify::{run_verify, violation_artifact, write_artifact};
use entmeasure_cli::{measure, with_workers, CliError, Result};

#[derive(Parser)]
#[command(name = "entmeasure", version, about = "Entanglement measures and bound audits for two-qubit states")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report N, C, EoF (and E_R with --full) for a JSON state file.
    Measure {
        file: PathBuf,
        /// Also run the relative-entropy solver.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        json: bool,
    },
    /// Sample random entangled states into an x,y,rank,seed CSV.
    Scatter {
        /// Defaults to 20000 for nc and 2000 for ere.
        #[arg(long)]
        samples: Option<usize>,
        /// 1, 2, 3, 4 or all.
        #[arg(long, default_value = "all")]
        rank: RankChoice,
        #[arg(long, value_enum)]
        pair: Pair,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Re-read the written file and audit every row.
        #[arg(long)]
        self_check: bool,
    },
    /// Audit both negativity bounds on random states of ranks 2-4.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
        /// Where the offending state goes when a bound fails.
        #[arg(long, default_value = "verify-violation.json")]
        artifact: PathBuf,
    },
    /// Tabulate an analytic bound curve.
    Curve {
        #[arg(long, value_enum)]
        which: Curve,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn scatter(
    samples: Option<usize>,
    rank: RankChoice,
    pair: Pair,
    seed: u64,
    out: &Path,
    check: bool,
    workers: Option<usize>,
) -> Result<()> {
    let samples = samples.unwrap_or(pair.default_samples());
    if pair == Pair::Ere {
        eprintln!(
            "ere scatter: {samples} solver runs at tol {:e}; budget about 2 ms per state per core, up to 50 ms for hard states",
            entmeasure_cli::scatter::ERE_SOLVER_TOL
        );
    }
    let started = Instant::now();
    let cfg = ScatterConfig::new(pair, rank, samples, seed);
    let output = with_workers(workers, || run_scatter(&cfg))??;
    write_scatter(&output, out)?;
    eprintln!(
        "{} rows, {} separable skipped{} in {:.1} s -> {}",
        output.rows.len(),
        output.skipped,
        if output.uncertified > 0 {
            format!(", {} E_R values uncertified at solver tol", output.uncertified)
        } else {
            String::new()
        },
        started.elapsed().as_secs_f64(),
        out.display()
    );
    if check {
        let written = std::fs::read_to_string(out).map_err(|source| CliError::Read {
            path: out.to_owned(),
            source,
        })?;
        let parsed = parse_scatter(&written)?;
        let report = with_workers(workers, || self_check(&parsed, pair))??;
        if pair == Pair::Ere && report.below_envelope > 0 {
            eprintln!("note: {} rows fall below the empirical E_R envelope", report.below_envelope);
        }
        if !report.failures.is_empty() {
            for f in report.failures.iter().take(10) {
                eprintln!("{f}");
            }
            return Err(CliError::Audit(format!("{} of {} rows", report.failures.len(), report.rows)));
        }
        eprintln!("self-check: {} rows ok", report.rows);
    }
    Ok(())
}

fn verify(samples: usize, seed: u64, tol: f64, artifact: &Path, workers: Option<usize>) -> Result<ExitCode> {
    let report = with_workers(workers, || run_verify(samples, seed, tol))??;
    print!("{}", report.summary());
    match violation_artifact(&report)? {
        None => {
            println!("no violation beyond tol");
            Ok(ExitCode::SUCCESS)
        }
        Some(a) => {
            write_artifact(&a, artifact)?;
            println!(
                "VIOLATION: {:?} bound by {:.3e} (rank {}, seed {}); state written to {}",
                a.bound,
                a.violation,
                a.rank,
                a.seed,
                artifact.display()
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Measure { file, full, json } => {
            let report = measure::measure_file(&file, full)?;
            let text = if json {
                measure::render_json(&report)
            } else {
                measure::render_table(&report)
            };
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
        Command::Scatter {
            samples,
            rank,
            pair,
            seed,
            out,
            self_check,
        } => scatter(samples, rank, pair, seed, &out, self_check, cli.workers)?,
        Command::Verify {
            samples,
            seed,
            tol,
            artifact,
        } => return verify(samples, seed, tol, &artifact, cli.workers),
        Command::Curve { which, points, out } => {
            let text = curve_csv(&curve_points(which, points)?);
            entmeasure_cli::write_file(&out, &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
