//! Per-iteration metrics and the trace CSV format.
//!
//! Trace CSV columns, in order:
//! `k, transmissions_total, grad_evals_total, rel_cost_error,
//! primal_error_norm, dual_sum_norm, lyapunov_value`. Reals are written in
//! `{:.17e}` so that reruns are byte-identical and values round-trip.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::almethods::RunTrace;
use crate::error::{Error, Result};
use crate::linalg::{block, block_sum, dist, norm};
use crate::network::NetworkModel;
use crate::objective::ObjectiveStack;
use crate::theory::{lyapunov_value, SaddlePoint};

use super::reference::ReferenceSolution;

pub const TRACE_HEADER: [&str; 7] = [
    "k",
    "transmissions_total",
    "grad_evals_total",
    "rel_cost_error",
    "primal_error_norm",
    "dual_sum_norm",
    "lyapunov_value",
];

/// `(1/N) Σ_i (f(x_i) − f*) / (f(0) − f*)` with `f` the full aggregate cost.
pub fn relative_cost_error(stack: &ObjectiveStack, reference: &ReferenceSolution, x: &[f64]) -> Result<f64> {
    let gap = reference.cost_gap();
    if !(gap > 0.0) {
        return Err(Error::DegenerateReference { gap });
    }
    let n = stack.node_count();
    let d = stack.dim();
    if x.len() != n * d {
        return Err(Error::DimensionMismatch { expected: n * d, got: x.len() });
    }
    let mut total = 0.0;
    for i in 0..n {
        total += (stack.eval_aggregate(block(x, i, d))? - reference.f_star) / gap;
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub transmissions_total: u64,
    pub grad_evals_total: u64,
    pub rel_cost_error: f64,
    /// `‖x(k) − 1⊗x*‖`.
    pub primal_error_norm: f64,
    /// `‖Σ_i μ_i(k)‖`.
    pub dual_sum_norm: f64,
    pub lyapunov_value: f64,
}

/// Metrics for every record of `trace`.
pub fn trace_rows(
    trace: &RunTrace,
    stack: &ObjectiveStack,
    net: &NetworkModel,
    reference: &ReferenceSolution,
    saddle: &SaddlePoint,
) -> Result<Vec<TraceRow>> {
    let d = stack.dim();
    trace
        .records
        .iter()
        .map(|r| {
            Ok(TraceRow {
                k: r.k,
                transmissions_total: r.transmissions,
                grad_evals_total: r.grad_evals_total(),
                rel_cost_error: relative_cost_error(stack, reference, &r.x)?,
                primal_error_norm: dist(&r.x, &saddle.x_bullet),
                dual_sum_norm: norm(&block_sum(&r.mu, d)),
                lyapunov_value: lyapunov_value(&r.x, &r.mu, net.spectrum(), saddle, stack.h_min()),
            })
        })
        .collect()
}

fn real(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_trace_csv(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.transmissions_total.to_string(),
            r.grad_evals_total.to_string(),
            real(r.rel_cost_error),
            real(r.primal_error_norm),
            real(r.dual_sum_norm),
            real(r.lyapunov_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::Config(format!("unexpected trace header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?)
}
