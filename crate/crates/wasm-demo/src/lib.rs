//! Browser bindings: a negativity/concurrence point cloud, the two bound
//! curves, and a one-parameter state explorer. Every function is plain Rust
//! as well, so the demo logic is tested natively.

use entmeasure::bounds::{check_bounds, er_lower_curve, negativity_lower_bound, ENTANGLED_TOL};
use entmeasure::measures::{concurrence, eof, negativity};
use entmeasure::relent::{rel_entropy_entanglement_best_effort, SolverConfig};
use entmeasure::states::{
    bell_diagonal, derive_seed, mems_rank2, sample_random, werner, BellDiagonalSpec, DensityMatrix, PureState,
};
use entmeasure::C64;
use wasm_bindgen::prelude::*;

/// Flat `[x0, y0, x1, y1, …]` of (concurrence, negativity) for the entangled
/// states among `samples` draws. `rank` 0 cycles through ranks 1–4.
#[wasm_bindgen]
pub fn scatter_nc(samples: u32, rank: u32, seed: u32) -> Result<Vec<f64>, String> {
    if rank > 4 {
        return Err(format!("rank must be 0 (all) or 1-4, got {rank}"));
    }
    let mut out = Vec::with_capacity(2 * samples as usize);
    for i in 0..u64::from(samples) {
        let r = if rank == 0 { 1 + (i % 4) as usize } else { rank as usize };
        let rho = sample_random(r, derive_seed(u64::from(seed), i)).map_err(|e| e.to_string())?;
        let n = negativity(&rho);
        if n > ENTANGLED_TOL {
            out.extend([concurrence(&rho), n]);
        }
    }
    Ok(out)
}

/// Flat `[x0, y0, …]` of `"neg-lower"` or `"er-lower"` on a uniform grid.
#[wasm_bindgen]
pub fn curve(which: &str, points: u32) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let f = match which {
        "neg-lower" => negativity_lower_bound,
        "er-lower" => er_lower_curve,
        _ => return Err(format!("unknown curve {which:?}")),
    };
    let mut out = Vec::with_capacity(2 * points as usize);
    for i in 0..points {
        let x = f64::from(i) / f64::from(points - 1);
        out.extend([x, f(x).map_err(|e| e.to_string())?]);
    }
    Ok(out)
}

fn family_state(family: &str, t: f64) -> Result<DensityMatrix, String> {
    let rho = match family {
        "werner" => werner(t),
        "mems" => mems_rank2(t),
        "bell" => {
            let r = (1.0 - t) / 3.0;
            BellDiagonalSpec::from_weights([t, r, r, r]).map(|s| bell_diagonal(&s))
        }
        "pure" => PureState::new([
            C64::new(t.clamp(0.0, 1.0).sqrt(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new((1.0 - t).clamp(0.0, 1.0).sqrt(), 0.0),
        ])
        .map(|p| p.density()),
        _ => return Err(format!("unknown family {family:?}")),
    };
    rho.map_err(|e| e.to_string())
}

/// Measures of a one-parameter state:
/// `werner` (p), `mems` (C), `bell` (λ₁, rest equal), `pure` (|a|² of
/// a|00⟩ + b|11⟩). Returns `[N, C, EoF, E_R, gap, lower(C)]`; `E_R` and its
/// certified gap come from the solver.
#[wasm_bindgen]
pub fn explore(family: &str, t: f64) -> Result<Vec<f64>, String> {
    let rho = family_state(family, t)?;
    let v = check_bounds(&rho);
    let cfg = SolverConfig {
        tol: 1e-5,
        ..SolverConfig::default()
    };
    let er = rel_entropy_entanglement_best_effort(&rho, &cfg).map_err(|e| e.to_string())?;
    Ok(vec![negativity(&rho), concurrence(&rho), eof(&rho), er.value, er.gap_bound, v.lower_curve])
}
