use super::config::AlgorithmConfig;

/// Snapshot after outer iteration `k` (record 0 is the initial state).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    /// Cumulative per-node broadcasts across all nodes.
    pub transmissions: u64,
    /// Cumulative gradient evaluations spent in inner gradient steps.
    pub inner_grad_evals: u64,
    /// Cumulative gradient evaluations spent inside local prox solves.
    pub prox_grad_evals: u64,
    /// Inner iterations (sweeps or ticks) executed in this outer iteration.
    pub inner_iterations: u64,
    pub elapsed_secs: f64,
}

impl TraceRecord {
    pub fn grad_evals_total(&self) -> u64 {
        self.inner_grad_evals + self.prox_grad_evals
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub config: Option<AlgorithmConfig>,
    pub dim: usize,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    /// Records ignoring wall-clock time, for reproducibility comparisons.
    pub fn same_iterates(&self, other: &RunTrace) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.k == b.k
                    && a.x == b.x
                    && a.mu == b.mu
                    && a.transmissions == b.transmissions
                    && a.inner_grad_evals == b.inner_grad_evals
                    && a.prox_grad_evals == b.prox_grad_evals
            })
    }
}
