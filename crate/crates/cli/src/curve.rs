use entmeasure::bounds::{er_lower_curve, negativity_lower_bound};

use crate::{fmt_sig, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Curve {
    /// Smallest negativity at given concurrence.
    NegLower,
    /// Smallest relative entropy of entanglement at given entanglement of formation.
    ErLower,
}

/// The curve on a uniform grid of `points ≥ 2` abscissae over `[0, 1]`.
pub fn curve_points(which: Curve, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {points}")));
    }
    (0..points)
        .map(|i| {
            let x = i as f64 / (points - 1) as f64;
            let y = match which {
                Curve::NegLower => negativity_lower_bound(x)?,
                Curve::ErLower => er_lower_curve(x)?,
            };
            Ok((x, y))
        })
        .collect()
}

pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in points {
        out.push_str(&format!("{},{}\n", fmt_sig(*x), fmt_sig(*y)));
    }
    out
}
