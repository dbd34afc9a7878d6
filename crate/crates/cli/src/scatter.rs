//! Point clouds of (concurrence, negativity) or (EoF, E_R) over random
//! entangled states. Row `i` is drawn from a generator seeded by
//! `derive_seed(seed, i)`, so the output does not depend on how rows are
//! spread across workers.

use std::path::Path;
use std::str::FromStr;

use entmeasure::bounds::{check_bounds, er_lower_curve, ENTANGLED_TOL};
use entmeasure::measures::{concurrence, eof, negativity};
use entmeasure::relent::{rel_entropy_entanglement, SolverConfig, SolveError};
use entmeasure::states::{derive_seed, sample_random};
use rayon::prelude::*;

use crate::{fmt_sig, write_file, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Pair {
    /// x = concurrence, y = negativity.
    Nc,
    /// x = entanglement of formation, y = relative entropy of entanglement.
    Ere,
}

impl Pair {
    pub fn default_samples(self) -> usize {
        match self {
            Pair::Nc => 20_000,
            Pair::Ere => 2_000,
        }
    }
}

/// Solver tolerance for `E_R` points; the figure is qualitative.
pub const ERE_SOLVER_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankChoice {
    Fixed(usize),
    /// Cycles through ranks 1–4 by row index.
    All,
}

impl RankChoice {
    pub fn rank_of(self, index: u64) -> usize {
        match self {
            RankChoice::Fixed(r) => r,
            RankChoice::All => 1 + (index % 4) as usize,
        }
    }
}

impl FromStr for RankChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(RankChoice::All),
            _ => match s.parse::<usize>() {
                Ok(r @ 1..=4) => Ok(RankChoice::Fixed(r)),
                _ => Err(format!("rank must be 1, 2, 3, 4 or all, got {s:?}")),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterRow {
    pub x: f64,
    pub y: f64,
    pub rank: usize,
    /// Seed that regenerates the state via `sample_random(rank, seed)`.
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ScatterConfig {
    pub samples: usize,
    pub rank: RankChoice,
    pub pair: Pair,
    pub seed: u64,
    pub solver_tol: f64,
}

impl ScatterConfig {
    pub fn new(pair: Pair, rank: RankChoice, samples: usize, seed: u64) -> Self {
        Self {
            samples,
            rank,
            pair,
            seed,
            solver_tol: ERE_SOLVER_TOL,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScatterOutput {
    pub rows: Vec<ScatterRow>,
    pub skipped: usize,
    /// `E_R` points whose solver stopped short of `solver_tol`.
    pub uncertified: usize,
}

enum Sample {
    Separable,
    Row { row: ScatterRow, certified: bool },
}

fn sample(cfg: &ScatterConfig, index: u64) -> Result<Sample> {
    let rank = cfg.rank.rank_of(index);
    let seed = derive_seed(cfg.seed, index);
    let rho = sample_random(rank, seed)?;
    let n = negativity(&rho);
    if n <= ENTANGLED_TOL {
        return Ok(Sample::Separable);
    }
    let (x, y, certified) = match cfg.pair {
        Pair::Nc => (concurrence(&rho), n, true),
        Pair::Ere => {
            let solver = SolverConfig {
                tol: cfg.solver_tol,
                seed,
                ..SolverConfig::default()
            };
            let (r, certified) = match rel_entropy_entanglement(&rho, &solver) {
                Ok(r) => (r, true),
                Err(SolveError::MaxIterations { best }) => (*best, false),
                Err(SolveError::State(e)) => return Err(e.into()),
            };
            (eof(&rho), r.value, certified)
        }
    };
    Ok(Sample::Row {
        row: ScatterRow { x, y, rank, seed },
        certified,
    })
}

pub fn run_scatter(cfg: &ScatterConfig) -> Result<ScatterOutput> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let samples: Vec<Sample> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| sample(cfg, i))
        .collect::<Result<_>>()?;
    let mut out = ScatterOutput::default();
    for s in samples {
        match s {
            Sample::Separable => out.skipped += 1,
            Sample::Row { row, certified } => {
                out.uncertified += usize::from(!certified);
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

pub fn scatter_csv(out: &ScatterOutput) -> String {
    let mut text = String::from("x,y,rank,seed\n");
    for r in &out.rows {
        text.push_str(&format!("{},{},{},{}\n", fmt_sig(r.x), fmt_sig(r.y), r.rank, r.seed));
    }
    text.push_str(&format!("# skipped: {}\n", out.skipped));
    text
}

pub fn write_scatter(out: &ScatterOutput, path: &Path) -> Result<()> {
    write_file(path, &scatter_csv(out))
}

/// Parses a scatter CSV, including the skipped-count footer.
pub fn parse_scatter(text: &str) -> Result<ScatterOutput> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Csv(e.to_string()))?;
    if header != vec!["x", "y", "rank", "seed"] {
        return Err(CliError::Csv(format!("unexpected header {header:?}")));
    }
    let mut out = ScatterOutput::default();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Csv(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let bad = |i: usize| CliError::Csv(format!("bad field {:?} in {record:?}", field(i)));
        out.rows.push(ScatterRow {
            x: field(0).parse().map_err(|_| bad(0))?,
            y: field(1).parse().map_err(|_| bad(1))?,
            rank: field(2).parse().map_err(|_| bad(2))?,
            seed: field(3).parse().map_err(|_| bad(3))?,
        });
    }
    out.skipped = text
        .lines()
        .find_map(|l| l.strip_prefix("# skipped: "))
        .ok_or_else(|| CliError::Csv("missing \"# skipped\" footer".into()))?
        .trim()
        .parse()
        .map_err(|_| CliError::Csv("bad skipped count".into()))?;
    Ok(out)
}

/// Outcome of re-deriving every row of a scatter file from its seed.
#[derive(Clone, Debug, Default)]
pub struct SelfCheck {
    pub rows: usize,
    pub failures: Vec<String>,
    /// `E_R` rows below the rank-2 envelope by more than the solver
    /// tolerance; that envelope is empirical, so these are reported only.
    pub below_envelope: usize,
}

/// Regenerates each row's state, recomputes its measures and audits the
/// bound inequalities on both the recomputed and the printed values.
pub fn self_check(parsed: &ScatterOutput, pair: Pair) -> Result<SelfCheck> {
    const PRINT_TOL: f64 = 1e-9;
    const ER_TOL: f64 = 1e-3;
    let results: Vec<(Option<String>, bool)> = parsed
        .rows
        .par_iter()
        .map(|row| -> Result<(Option<String>, bool)> {
            let rho = sample_random(row.rank, row.seed)?;
            let mut problems = Vec::new();
            let mut below = false;
            match pair {
                Pair::Nc => {
                    let v = check_bounds(&rho);
                    if !v.holds() {
                        problems.push(format!("bounds violated: {v:?}"));
                    }
                    if (v.concurrence - row.x).abs() > PRINT_TOL || (v.negativity - row.y).abs() > PRINT_TOL {
                        problems.push(format!("recomputed ({}, {}) differs", v.concurrence, v.negativity));
                    }
                    let lower = entmeasure::bounds::negativity_lower_bound(row.x.clamp(0.0, 1.0))?;
                    if row.y < lower - PRINT_TOL || row.y > row.x + PRINT_TOL {
                        problems.push("printed point outside the bound region".into());
                    }
                }
                Pair::Ere => {
                    if (eof(&rho) - row.x).abs() > PRINT_TOL {
                        problems.push(format!("recomputed EoF {} differs", eof(&rho)));
                    }
                    if row.y > row.x + ER_TOL {
                        problems.push("E_R exceeds EoF".into());
                    }
                    below = row.y < er_lower_curve(row.x.clamp(0.0, 1.0))? - ER_TOL;
                }
            }
            let msg = (!problems.is_empty())
                .then(|| format!("row (rank {}, seed {}): {}", row.rank, row.seed, problems.join("; ")));
            Ok((msg, below))
        })
        .collect::<Result<_>>()?;
    let mut check = SelfCheck {
        rows: parsed.rows.len(),
        ..SelfCheck::default()
    };
    for (msg, below) in results {
        check.failures.extend(msg);
        check.below_envelope += usize::from(below);
    }
    Ok(check)
}
