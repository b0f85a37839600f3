use crate::error::{Error, Result};
use crate::linalg::{block, block_mut, replicate};
use crate::network::NetworkModel;

/// Stacked primal and dual iterates plus the cached neighbor averages.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualState {
    dim: usize,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    /// `x̄_i = Σ_{j∈O_i} W_ij x_j`.
    pub xbar: Vec<f64>,
    /// Outer iteration index `k`.
    pub k: usize,
}

impl PrimalDualState {
    /// Every node starts at `x0`, duals at zero.
    pub fn uniform(net: &NetworkModel, x0: &[f64]) -> Self {
        let n = net.node_count();
        let x = replicate(x0, n);
        Self::from_parts(net, x0.len(), x, vec![0.0; n * x0.len()]).expect("consistent sizes")
    }

    pub fn zeros(net: &NetworkModel, dim: usize) -> Self {
        Self::uniform(net, &vec![0.0; dim])
    }

    /// Arbitrary `(x, μ)`; `x̄` is recomputed.
    pub fn from_parts(net: &NetworkModel, dim: usize, x: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let len = net.node_count() * dim;
        if x.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: x.len() });
        }
        if mu.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: mu.len() });
        }
        let xbar = net.mix(&x, dim);
        Ok(PrimalDualState { dim, x, mu, xbar, k: 0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_block(&self, i: usize) -> &[f64] {
        block(&self.x, i, self.dim)
    }

    pub fn mu_block(&self, i: usize) -> &[f64] {
        block(&self.mu, i, self.dim)
    }

    pub fn xbar_block(&self, i: usize) -> &[f64] {
        block(&self.xbar, i, self.dim)
    }

    pub fn refresh_xbar(&mut self, net: &NetworkModel) {
        self.xbar = net.mix(&self.x, self.dim);
    }

    /// Refresh `x̄_j` for `j ∈ O_i` only, after node `i` changed its block.
    pub fn refresh_xbar_around(&mut self, net: &NetworkModel, i: usize) {
        let d = self.dim;
        for &(j, _) in net.mixing_row(i) {
            let mut acc = vec![0.0; d];
            net.weighted_average_into(j, &self.x, d, &mut acc);
            block_mut(&mut self.xbar, j, d).copy_from_slice(&acc);
        }
    }

    /// Largest deviation between cached and recomputed `x̄`.
    pub fn xbar_drift(&self, net: &NetworkModel) -> f64 {
        let fresh = net.mix(&self.x, self.dim);
        crate::linalg::norm_inf(&crate::linalg::sub(&fresh, &self.xbar))
    }

    /// In-place `μ_i ← μ_i + α (x_i − x̄_i)`; requires a fresh `x̄`.
    pub fn apply_dual_update(&mut self, alpha: f64) {
        for ((m, x), xb) in self.mu.iter_mut().zip(&self.x).zip(&self.xbar) {
            *m += alpha * (x - xb);
        }
    }
}

/// `μ(k+1) = μ(k) + α(𝓛⊗I) x(k+1)`, evaluated node by node.
pub fn dual_update(state: &PrimalDualState, net: &NetworkModel, alpha: f64) -> PrimalDualState {
    let mut next = state.clone();
    debug_assert!(state.xbar_drift(net) <= 1e-12 * (1.0 + crate::linalg::norm_inf(&state.x)));
    next.apply_dual_update(alpha);
    next
}
