//! Per-state report for a JSON state file.

use std::path::Path;

use entmeasure::bounds::{check_bounds, BoundVerdict};
use entmeasure::measures::MeasureReport;
use entmeasure::relent::{rel_entropy_entanglement_best_effort, SolverConfig};
use entmeasure::states::from_json;
use serde::Serialize;

use crate::{fmt_sig, CliError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub measures: MeasureReport,
    /// Certified bound on how far `measures.rel_entropy` may sit above the
    /// true value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_entropy_gap: Option<f64>,
    pub bounds: BoundVerdict,
}

pub fn measure_file(path: &Path, full: bool) -> Result<StateReport> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let rho = from_json(&text)?;
    let mut measures = MeasureReport::compute(&rho);
    let mut rel_entropy_gap = None;
    if full {
        let r = rel_entropy_entanglement_best_effort(&rho, &SolverConfig::default())?;
        measures.rel_entropy = Some(r.value);
        rel_entropy_gap = Some(r.gap_bound);
    }
    Ok(StateReport {
        measures,
        rel_entropy_gap,
        bounds: check_bounds(&rho),
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_table(r: &StateReport) -> String {
    let m = &r.measures;
    let b = &r.bounds;
    let mut rows: Vec<(&str, String)> = vec![
        ("negativity", fmt_sig(m.negativity)),
        ("concurrence", fmt_sig(m.concurrence)),
        ("entanglement of formation", fmt_sig(m.eof)),
    ];
    if let (Some(er), Some(gap)) = (m.rel_entropy, r.rel_entropy_gap) {
        rows.push(("relative entropy of ent.", format!("{} (gap <= {gap:.1e})", fmt_sig(er))));
    }
    rows.extend([
        ("lower curve at C", fmt_sig(b.lower_curve)),
        ("N <= C", format!("{} (slack {:.3e})", yes_no(b.upper_ok), b.slack_upper)),
        ("N >= lower(C)", format!("{} (slack {:.3e})", yes_no(b.lower_ok), b.slack_lower)),
        ("upper bound tight", yes_no(b.upper_tight).to_string()),
        ("lower bound tight", yes_no(b.lower_tight).to_string()),
    ]);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

pub fn render_json(r: &StateReport) -> String {
    serde_json::to_string_pretty(r).expect("plain data serializes") + "\n"
}
