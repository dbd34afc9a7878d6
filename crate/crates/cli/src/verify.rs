//! Randomized audit of `N ≤ C` and `N ≥ √((1−C)²+C²) − (1−C)` over random
//! states of ranks 2–4.

use std::path::Path;

use entmeasure::bounds::check_bounds;
use entmeasure::states::{derive_seed, sample_random, StateFile};
use rayon::prelude::*;
use serde::Serialize;

use crate::{write_file, CliError, Result};

pub const RANKS: [usize; 3] = [2, 3, 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `N ≤ C`.
    Upper,
    /// `N ≥ lower_curve(C)`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Worst {
    /// How far the inequality fails; negative when it holds with room.
    pub violation: f64,
    pub rank: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub samples_per_rank: usize,
    pub tol: f64,
    pub upper: Worst,
    pub lower: Worst,
}

impl VerifyReport {
    pub fn worst(&self) -> Option<(Bound, Worst)> {
        let (bound, w) = if self.upper.violation >= self.lower.violation {
            (Bound::Upper, self.upper)
        } else {
            (Bound::Lower, self.lower)
        };
        (w.violation > self.tol).then_some((bound, w))
    }

    pub fn summary(&self) -> String {
        format!(
            "{} states per rank (ranks 2-4), tol {:e}\n  max violation N <= C:           {:+.3e} (rank {}, seed {})\n  max violation N >= lower(C):    {:+.3e} (rank {}, seed {})\n",
            self.samples_per_rank,
            self.tol,
            self.upper.violation,
            self.upper.rank,
            self.upper.seed,
            self.lower.violation,
            self.lower.rank,
            self.lower.seed,
        )
    }
}

/// Seed of sample `index` of `rank`.
pub fn sample_seed(seed: u64, rank: usize, index: u64) -> u64 {
    derive_seed(derive_seed(seed, rank as u64), index)
}

fn max_by_violation(a: Worst, b: Worst) -> Worst {
    // Ties go to the earlier sample so the report is schedule-independent.
    if b.violation > a.violation || (b.violation == a.violation && (b.rank, b.seed) < (a.rank, a.seed)) {
        b
    } else {
        a
    }
}

pub fn run_verify(samples: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if !tol.is_finite() {
        return Err(CliError::Usage(format!("--tol must be finite, got {tol}")));
    }
    let jobs: Vec<(usize, u64)> = RANKS
        .iter()
        .flat_map(|&r| (0..samples as u64).map(move |i| (r, sample_seed(seed, r, i))))
        .collect();
    let per_state: Vec<(Worst, Worst)> = jobs
        .par_iter()
        .map(|&(rank, seed)| -> Result<(Worst, Worst)> {
            let v = check_bounds(&sample_random(rank, seed)?);
            Ok((
                Worst { violation: 0.0 - v.slack_upper, rank, seed },
                Worst { violation: 0.0 - v.slack_lower, rank, seed },
            ))
        })
        .collect::<Result<_>>()?;
    let mut it = per_state.into_iter();
    let first = it.next().expect("at least one sample");
    let (upper, lower) = it.fold(first, |(u, l), (nu, nl)| (max_by_violation(u, nu), max_by_violation(l, nl)));
    Ok(VerifyReport {
        samples_per_rank: samples,
        tol,
        upper,
        lower,
    })
}

/// Reproduction record for the worst offending state.
#[derive(Clone, Debug, Serialize)]
pub struct ViolationArtifact {
    pub bound: Bound,
    pub violation: f64,
    pub tol: f64,
    pub rank: usize,
    pub seed: u64,
    pub concurrence: f64,
    pub negativity: f64,
    pub lower_curve: f64,
    pub state: StateFile,
}

pub fn violation_artifact(report: &VerifyReport) -> Result<Option<ViolationArtifact>> {
    let Some((bound, w)) = report.worst() else {
        return Ok(None);
    };
    let rho = sample_random(w.rank, w.seed)?;
    let v = check_bounds(&rho);
    Ok(Some(ViolationArtifact {
        bound,
        violation: w.violation,
        tol: report.tol,
        rank: w.rank,
        seed: w.seed,
        concurrence: v.concurrence,
        negativity: v.negativity,
        lower_curve: v.lower_curve,
        state: StateFile::from_density(&rho),
    }))
}

pub fn write_artifact(artifact: &ViolationArtifact, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(artifact).expect("plain data serializes");
    write_file(path, &(text + "\n"))
}
