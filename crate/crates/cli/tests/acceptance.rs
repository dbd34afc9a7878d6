//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use entmeasure::bounds::{is_negativity_tight, negativity_lower_bound};
use entmeasure::filters::{
    apply_filter, bell_diagonal_normal_form, concurrence_transform, filter_trace, wootters_decomposition,
    FilterPair, NORMAL_FORM_MAX_ITERS, NORMAL_FORM_TOL,
};
use entmeasure::measures::{concurrence, eof, negativity};
use entmeasure::relent::{er_mems_closed_form, rel_entropy_entanglement_best_effort, SolverConfig};
use entmeasure::states::{
    bell_diagonal, derive_seed, mems_rank2, rng_from_seed, sample_bell_diagonal_with, sample_pure_with,
    sample_random, BellDiagonalSpec, DensityMatrix,
};
use entmeasure::Mat2;
use rayon::prelude::*;

const SEED: u64 = 2024;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn seeded(tag: u64, rank: usize, index: u64) -> DensityMatrix {
    sample_random(rank, derive_seed(derive_seed(SEED ^ tag, rank as u64), index)).unwrap()
}

fn max_of(it: impl ParallelIterator<Item = f64>) -> f64 {
    it.reduce(|| f64::NEG_INFINITY, f64::max)
}

fn h(p: f64) -> f64 {
    let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    t(p) + t(1.0 - p)
}

/// Criteria 1 and 2 share the population.
fn negativity_bounds() -> (Outcome, Outcome) {
    let started = Instant::now();
    let worst: Vec<(f64, f64)> = [2usize, 3, 4]
        .iter()
        .map(|&rank| {
            (0..10_000u64)
                .into_par_iter()
                .map(|i| {
                    let rho = seeded(1, rank, i);
                    let (n, c) = (negativity(&rho), concurrence(&rho));
                    (n - c, negativity_lower_bound(c).unwrap() - n)
                })
                .reduce(|| (f64::NEG_INFINITY, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)))
        })
        .collect();
    let secs = started.elapsed().as_secs_f64();
    let up = worst.iter().map(|w| w.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = worst.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    (
        outcome(up <= 1e-9 && secs <= 10.0, format!("max(N - C) = {up:.2e} over 3x10^4 states in {secs:.2}s")),
        outcome(lo <= 1e-9, format!("max(lower(C) - N) = {lo:.2e}")),
    )
}

fn upper_tightness() -> Outcome {
    let results: Vec<(f64, bool)> = (0..2000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(SEED ^ 3, i));
            let rho = if i < 1000 {
                sample_pure_with(&mut rng).density()
            } else {
                bell_diagonal(&sample_bell_diagonal_with(&mut rng))
            };
            let n = negativity(&rho);
            let tight = n <= 1e-9 || is_negativity_tight(&rho).unwrap();
            ((n - concurrence(&rho)).abs(), tight)
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let missed = results.iter().filter(|r| !r.1).count();
    outcome(
        gap <= 1e-9 && missed == 0,
        format!("max |N - C| = {gap:.2e}; {missed} entangled states not classified tight"),
    )
}

fn lower_tightness() -> Outcome {
    let (mut dn, mut dq) = (0.0f64, 0.0f64);
    for k in 1..=19 {
        let c = 0.05 * k as f64;
        let n = negativity(&mems_rank2(c).unwrap());
        dn = dn.max((n - negativity_lower_bound(c).unwrap()).abs());
        dq = dq.max((n * n + 2.0 * n * (1.0 - c) - c * c).abs());
    }
    outcome(dn <= 1e-10 && dq <= 1e-12, format!("max |N - lower(C)| = {dn:.2e}, max quadratic residual = {dq:.2e}"))
}

fn decomposition() -> Outcome {
    let errs: Vec<[f64; 3]> = (1..=4usize)
        .flat_map(|rank| (0..200u64).map(move |i| (rank, i)))
        .par_bridge()
        .map(|(rank, i)| {
            let rho = seeded(5, rank, i);
            let c = concurrence(&rho);
            let d = wootters_decomposition(&rho).unwrap();
            let per = d.elements.iter().map(|(_, p)| (p.concurrence() - c).abs()).fold(0.0, f64::max);
            [per, (d.weight_sum() - 1.0).abs(), (d.reconstruct() - *rho.mat()).frobenius_norm()]
        })
        .collect();
    let m = |k: usize| errs.iter().map(|e| e[k]).fold(0.0, f64::max);
    outcome(
        m(0) <= 1e-8 && m(1) <= 1e-10 && m(2) <= 1e-9,
        format!("800 states: element concurrence {:.2e}, weight sum {:.2e}, reconstruction {:.2e}", m(0), m(1), m(2)),
    )
}

fn filter_law() -> Outcome {
    let worst = max_of((0..500u64).into_par_iter().map(|i| {
        let mut rng = rng_from_seed(derive_seed(SEED ^ 6, i));
        let rho = sample_random(1 + (i % 4) as usize, derive_seed(SEED ^ 60, i)).unwrap();
        let f = FilterPair::random_with(&mut rng);
        let predicted = concurrence_transform(concurrence(&rho), &f, filter_trace(&rho, &f)).unwrap();
        (concurrence(&apply_filter(&rho, &f).unwrap()) - predicted.value).abs()
    }));
    outcome(worst <= 1e-9, format!("500 filtered states: max |C' - prediction| = {worst:.2e}"))
}

fn normal_form() -> Outcome {
    let half = Mat2::identity().scale_real(0.5);
    let results: Vec<Option<(f64, f64, usize)>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let rho = seeded(7, 4, i);
            let nf = bell_diagonal_normal_form(&rho, NORMAL_FORM_MAX_ITERS, NORMAL_FORM_TOL).ok()?;
            let marg = (nf.state.reduced_a() - half).frobenius_norm().max((nf.state.reduced_b() - half).frobenius_norm());
            let predicted = (2.0 * nf.spec.largest() - 1.0).max(0.0);
            let via_law = concurrence_transform(concurrence(&rho), &nf.filter, nf.trace_factor).unwrap().value;
            let dc = (concurrence(&nf.state) - predicted).abs().max((via_law - predicted).abs());
            Some((marg, dc, nf.iterations))
        })
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    let ok: Vec<_> = results.into_iter().flatten().collect();
    let marg = ok.iter().map(|r| r.0).fold(0.0, f64::max);
    let dc = ok.iter().map(|r| r.1).fold(0.0, f64::max);
    let iters = ok.iter().map(|r| r.2).max().unwrap_or(0);
    outcome(
        failed == 0 && marg <= 1e-9 && dc <= 1e-7 && iters <= NORMAL_FORM_MAX_ITERS,
        format!("{failed} failures; max marginal error {marg:.2e}, max |C - (2 lambda1 - 1)| = {dc:.2e}, max {iters} iterations"),
    )
}

fn solve(rho: &DensityMatrix) -> (f64, Duration) {
    let started = Instant::now();
    let r = rel_entropy_entanglement_best_effort(rho, &SolverConfig::default()).unwrap();
    (r.value, started.elapsed())
}

fn er_oracles() -> Outcome {
    let mut cases: Vec<(DensityMatrix, f64)> = [0.6, 0.7, 0.8, 0.9]
        .iter()
        .map(|&l1: &f64| {
            let r = (1.0 - l1) / 3.0;
            (bell_diagonal(&BellDiagonalSpec::new([l1, r, r, r]).unwrap()), 1.0 - h(l1))
        })
        .collect();
    for k in 1..=9 {
        let c = 0.1 * k as f64;
        cases.push((mems_rank2(c).unwrap(), er_mems_closed_form(c).unwrap()));
    }
    let (mut err, mut slowest) = (0.0f64, Duration::ZERO);
    for (rho, want) in &cases {
        let (v, t) = solve(rho);
        err = err.max((v - want).abs());
        slowest = slowest.max(t);
    }
    outcome(
        err <= 1e-3 && slowest <= Duration::from_secs(5),
        format!("13 oracle states: max error {err:.2e}, slowest solve {:.3}s", slowest.as_secs_f64()),
    )
}

fn er_below_eof() -> Outcome {
    let excess = max_of(
        (2..=4usize)
            .flat_map(|rank| (0..200u64).map(move |i| (rank, i)))
            .par_bridge()
            .map(|(rank, i)| {
                let rho = seeded(9, rank, i);
                solve(&rho).0 - eof(&rho)
            }),
    );
    let pure = max_of((0..200u64).into_par_iter().map(|i| {
        let rho = seeded(9, 1, i);
        (solve(&rho).0 - eof(&rho)).abs()
    }));
    outcome(
        excess <= 1e-3 && pure <= 1e-3,
        format!("600 mixed states: max(E_R - EoF) = {excess:.2e}; 200 pure states: max |E_R - EoF| = {pure:.2e}"),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entmeasure"))
}

fn scatter_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let status = bin().args(args).arg("--out").arg(&path).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(path).unwrap()
}

fn figure(dir: &Path) -> Outcome {
    let text = scatter_file(dir, "nc.csv", &["scatter", "--pair", "nc", "--samples", "20000", "--rank", "all", "--seed", "1"]);
    let text = String::from_utf8(text).unwrap();
    let (mut outside, mut rows) = (0usize, 0usize);
    let (mut near_upper, mut near_lower) = (f64::INFINITY, f64::INFINITY);
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let f: Vec<f64> = line.split(',').take(2).map(|v| v.parse().unwrap()).collect();
        let (x, y) = (f[0], f[1]);
        let lower = negativity_lower_bound(x.clamp(0.0, 1.0)).unwrap();
        outside += usize::from(y < lower - 1e-9 || y > x + 1e-9);
        near_upper = near_upper.min(x - y);
        near_lower = near_lower.min(y - lower);
        rows += 1;
    }
    outcome(
        outside == 0 && rows > 0 && near_upper < 0.01 && near_lower < 0.01,
        format!("{rows} entangled rows, {outside} outside; closest to C = N: {near_upper:.1e}, to lower curve: {near_lower:.1e}"),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let runs = [("nc", "20000"), ("ere", "300")];
    let mut identical = true;
    for (pair, samples) in runs {
        let files: Vec<Vec<u8>> = ["1", "2", "7", "7"]
            .iter()
            .enumerate()
            .map(|(k, w)| {
                scatter_file(dir, &format!("{pair}{k}.csv"), &["--workers", w, "scatter", "--pair", pair, "--samples", samples, "--seed", "5"])
            })
            .collect();
        identical &= files.windows(2).all(|w| w[0] == w[1]);
    }
    outcome(identical, "nc (20000) and ere (300) scatters with 1, 2, 7, 7 workers".into())
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (c1, c2) = negativity_bounds();
    let results = [
        ("1 upper bound N <= C", c1),
        ("2 lower bound N >= sqrt((1-C)^2+C^2)-(1-C)", c2),
        ("3 pure and Bell-diagonal states attain N = C", upper_tightness()),
        ("4 rank-2 MEMS attain the lower bound", lower_tightness()),
        ("5 equal-concurrence decomposition", decomposition()),
        ("6 filter transformation law", filter_law()),
        ("7 Bell-diagonal normal form", normal_form()),
        ("8 E_R solver vs closed forms", er_oracles()),
        ("9 E_R <= EoF, equal on pure states", er_below_eof()),
        ("10 nc scatter fills the region between the curves", figure(dir.path())),
        ("11 byte-identical scatter across worker counts", determinism(dir.path())),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
