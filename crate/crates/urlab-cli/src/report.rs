//! Report structures and emission: JSON for verdict bundles and
//! certificates, CSV for sweeps.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use urlab_core::verdict::UrVerdict;

use crate::config::Cpx;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRow {
    pub relation: String,
    pub state: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub saturated: bool,
    pub holds: bool,
}

impl VerdictRow {
    pub fn new(state: &str, v: &UrVerdict<f64>, floor: f64) -> Self {
        VerdictRow {
            relation: v.name.clone(),
            state: state.to_string(),
            lhs: v.lhs,
            rhs: v.rhs,
            margin: v.margin,
            saturated: v.saturated,
            holds: v.holds(floor),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatterySummary {
    pub relation: String,
    pub samples: usize,
    pub min_margin: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub command: String,
    pub seed: u64,
    pub floor: f64,
    pub saturation_tol: f64,
    pub verdicts: Vec<VerdictRow>,
    pub battery: Vec<BatterySummary>,
    pub violation_count: usize,
    /// The scenario exactly as read, for replaying the run.
    pub config_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub relation: String,
    pub state: String,
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Pure states: one row of amplitudes; mixed: the density matrix.
    pub state_data: Vec<Vec<Cpx>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub parameter: f64,
    pub relation: String,
    pub state: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub command: String,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub violation_count: usize,
    pub config_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzReport {
    pub command: String,
    pub dim: usize,
    pub matrices: usize,
    pub samples: usize,
    pub seed: u64,
    pub checks: usize,
    pub min_margin: f64,
    pub violation_count: usize,
    pub max_characteristic_mismatch: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub command: String,
    pub seed: u64,
    pub relation: String,
    pub family: String,
    pub start_margin: f64,
    pub best_margin: f64,
    pub evaluations: usize,
    pub best_params: Vec<f64>,
    pub config_text: String,
}

pub fn write_json<T: Serialize>(dir: Option<&Path>, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), &text)
            .with_context(|| format!("writing {name}"))?;
    }
    Ok(())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "parameter",
        "relation",
        "state",
        "lhs",
        "rhs",
        "margin",
        "saturated",
    ])?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            format!("{:.17e}", r.parameter),
            r.relation.clone(),
            r.state.clone(),
            format!("{:.17e}", r.lhs),
            format!("{:.17e}", r.rhs),
            format!("{:.17e}", r.margin),
            r.saturated.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
