//! Plot-ready trace CSV. Scalars use 17 significant digits, which round-trip
//! every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use padmm::TraceRecord;
use serde::Deserialize;

pub const TRACE_HEADER: &str = "k,L_alpha,L_bar,residual,step_x_total,step_y,step_z,d_norm,objective";

/// One parsed trace line.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    #[serde(rename = "L_alpha")]
    pub l_alpha: f64,
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    pub residual: f64,
    pub step_x_total: f64,
    pub step_y: f64,
    pub step_z: f64,
    pub d_norm: f64,
    pub objective: f64,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        TraceRow {
            k: r.k,
            l_alpha: r.l_alpha,
            l_bar: r.l_bar,
            residual: r.residual_norm,
            step_x_total: r.steps.x_total(),
            step_y: r.steps.y,
            step_z: r.steps.z,
            d_norm: r.d_norm,
            objective: r.objective,
        }
    }
}

pub fn render_trace(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(32 + rows.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        write!(out, "{}", r.k).unwrap();
        for v in [r.l_alpha, r.l_bar, r.residual, r.step_x_total, r.step_y, r.step_z, r.d_norm, r.objective] {
            write!(out, ",{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != TRACE_HEADER {
        bail!("unexpected trace header {header:?}");
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("trace row {}", i + 1)))
        .collect()
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    parse_trace(&text).with_context(|| format!("in {}", path.display()))
}
