//! Per-node subproblem solvers and the exact augmented-Lagrangian minimizer.
//!
//! A node's prox subproblem is
//!
//! ```text
//! minimize  f_i(y) + vᵀy + (ρ/2)‖y‖²,     v = μ_i − ρ x̄_i
//! ```
//!
//! solved by Nesterov's constant-momentum method for strongly convex
//! functions with a precomputed iteration count. [`exact_al_minimizer`]
//! solves the coupled problem over all nodes at once and is only meant as a
//! reference for tests and diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{block, dot, norm};
use crate::network::NetworkModel;
use crate::objective::{NodeCost, ObjectiveStack};

pub const DEFAULT_PROX_EPSILON: f64 = 1e-5;
pub const DEFAULT_PROX_MAX_ITERATIONS: u64 = 1_000_000;

/// One node's prox subproblem `f_i(y) + vᵀy + (ρ/2)‖y‖²`.
#[derive(Clone, Copy, Debug)]
pub struct ProxProblem<'a> {
    pub cost: &'a NodeCost,
    pub rho: f64,
    pub linear_term: &'a [f64],
}

impl<'a> ProxProblem<'a> {
    pub fn new(cost: &'a NodeCost, rho: f64, linear_term: &'a [f64]) -> Self {
        ProxProblem { cost, rho, linear_term }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.cost.value(y) + dot(self.linear_term, y) + 0.5 * self.rho * dot(y, y)
    }

    pub fn gradient_into(&self, y: &[f64], out: &mut [f64]) {
        self.cost.gradient_into(y, out);
        for ((o, v), yi) in out.iter_mut().zip(self.linear_term).zip(y) {
            *o += v + self.rho * yi;
        }
    }

    /// `(ν′, L′)`: strong convexity and smoothness constants used by the
    /// stopping rule. `L′` carries an extra `h_min_i`, matching the
    /// `h_max_i + ρ + P/N` choice for regularized logistic costs.
    pub fn constants(&self) -> (f64, f64) {
        let (lo, hi) = self.cost.hessian_bounds();
        (lo + self.rho, hi + self.rho + lo)
    }
}

/// Accuracy target and iteration cap for [`prox_local`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverBudget {
    /// Target optimality gap.
    pub epsilon: f64,
    pub max_iterations: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            epsilon: DEFAULT_PROX_EPSILON,
            max_iterations: DEFAULT_PROX_MAX_ITERATIONS,
        }
    }
}

impl SolverBudget {
    pub fn new(epsilon: f64, max_iterations: u64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(SolverBudget { epsilon, max_iterations })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProxOutcome {
    pub point: Vec<f64>,
    pub iterations: u64,
    pub grad_evals: u64,
}

/// Iteration count `⌈|log(2ε/(R′²L′)) / log(1 − √(ν′/L′))|⌉`; `None` when
/// `R′ = 0` (warm start already optimal).
pub fn prox_iteration_count(epsilon: f64, r_prime: f64, nu: f64, lip: f64) -> Option<f64> {
    let scale = r_prime * r_prime * lip;
    if scale == 0.0 {
        return None;
    }
    let num = (2.0 * epsilon / scale).ln();
    let den = (1.0 - (nu / lip).sqrt()).ln();
    Some((num / den).abs().ceil())
}

/// Solve the prox subproblem from `warm_start` with the accelerated method.
pub fn prox_local(p: &ProxProblem<'_>, budget: &SolverBudget, warm_start: &[f64]) -> Result<ProxOutcome> {
    let d = p.cost.dim();
    if warm_start.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: warm_start.len() });
    }
    if p.linear_term.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.linear_term.len() });
    }
    let (nu, lip) = p.constants();
    let mut grad = vec![0.0; d];
    p.gradient_into(warm_start, &mut grad);
    let r_prime = norm(&grad) / nu;
    let Some(count) = prox_iteration_count(budget.epsilon, r_prime, nu, lip) else {
        return Ok(ProxOutcome {
            point: warm_start.to_vec(),
            iterations: 0,
            grad_evals: 1,
        });
    };
    if !count.is_finite() || count > budget.max_iterations as f64 {
        return Err(Error::IterationCapExceeded {
            needed: if count.is_finite() { count as u64 } else { u64::MAX },
            cap: budget.max_iterations,
        });
    }
    let iterations = count as u64;
    let momentum = (lip.sqrt() - nu.sqrt()) / (lip.sqrt() + nu.sqrt());
    let step = 1.0 / lip;

    // x: main iterate, y: extrapolated point; grad holds ∇g(y).
    let mut x = warm_start.to_vec();
    let mut y = warm_start.to_vec();
    let mut x_next = vec![0.0; d];
    let mut grad_evals = 1;
    for it in 0..iterations {
        if it > 0 {
            p.gradient_into(&y, &mut grad);
            grad_evals += 1;
        }
        for k in 0..d {
            x_next[k] = y[k] - step * grad[k];
        }
        for k in 0..d {
            y[k] = x_next[k] + momentum * (x_next[k] - x[k]);
        }
        std::mem::swap(&mut x, &mut x_next);
    }
    Ok(ProxOutcome {
        point: x,
        iterations,
        grad_evals,
    })
}

/// One gradient step on the augmented Lagrangian in block `i`:
/// `(1 − βρ) x_i + βρ x̄_i − β (μ_i + ∇f_i(x_i))`.
pub fn gradient_step_local(
    cost: &NodeCost,
    x_i: &[f64],
    xbar_i: &[f64],
    mu_i: &[f64],
    beta: f64,
    rho: f64,
) -> Vec<f64> {
    let mut out = cost.gradient(x_i);
    let br = beta * rho;
    for k in 0..out.len() {
        out[k] = (1.0 - br) * x_i[k] + br * xbar_i[k] - beta * (mu_i[k] + out[k]);
    }
    out
}

/// `L_a(x; μ) = F(x) + μᵀx + (ρ/2) xᵀ(𝓛⊗I)x`.
pub fn augmented_lagrangian(stack: &ObjectiveStack, net: &NetworkModel, x: &[f64], mu: &[f64], rho: f64) -> Result<f64> {
    let lx = net.laplacian_apply(x, stack.dim());
    Ok(stack.eval_stack(x)? + dot(mu, x) + 0.5 * rho * dot(x, &lx))
}

/// `∇F(x) + μ + ρ(𝓛⊗I)x`.
pub fn augmented_lagrangian_gradient(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    x: &[f64],
    mu: &[f64],
    rho: f64,
) -> Result<Vec<f64>> {
    let mut g = stack.grad_stack(x)?;
    if mu.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: g.len(), got: mu.len() });
    }
    let lx = net.laplacian_apply(x, stack.dim());
    for k in 0..g.len() {
        g[k] += mu[k] + rho * lx[k];
    }
    Ok(g)
}

const EXACT_MAX_ITERATIONS: usize = 2_000_000;

/// `x′(μ) = argmin_x L_a(x; μ)` to stacked-gradient norm `tol`, by accelerated
/// gradient with adaptive restart, started from zero.
pub fn exact_al_minimizer(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    mu: &[f64],
    rho: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    exact_al_minimizer_from(stack, net, mu, rho, tol, None)
}

/// [`exact_al_minimizer`] with an optional warm start.
pub fn exact_al_minimizer_from(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    mu: &[f64],
    rho: f64,
    tol: f64,
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = stack.node_count();
    let d = stack.dim();
    if net.node_count() != n {
        return Err(Error::DimensionMismatch { expected: n, got: net.node_count() });
    }
    if mu.len() != n * d {
        return Err(Error::DimensionMismatch { expected: n * d, got: mu.len() });
    }
    if rho < 0.0 {
        return Err(Error::InvalidArgument(format!("rho must be non-negative, got {rho}")));
    }
    let lip = stack.h_max() + rho * net.spectrum().lambda_max();
    let sc = stack.h_min();
    let momentum = (lip.sqrt() - sc.sqrt()) / (lip.sqrt() + sc.sqrt());

    let mut x = warm_start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n * d]);
    let mut y = x.clone();
    let mut g = augmented_lagrangian_gradient(stack, net, &x, mu, rho)?;
    if norm(&g) <= tol {
        return Ok(x);
    }
    for _ in 0..EXACT_MAX_ITERATIONS {
        let gy = augmented_lagrangian_gradient(stack, net, &y, mu, rho)?;
        let x_next: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - gi / lip).collect();
        g = augmented_lagrangian_gradient(stack, net, &x_next, mu, rho)?;
        if norm(&g) <= tol {
            return Ok(x_next);
        }
        // Gradient-based restart keeps the momentum from overshooting.
        let step: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        if dot(&gy, &step) > 0.0 {
            y = x_next.clone();
        } else {
            y = x_next.iter().zip(&step).map(|(a, s)| a + momentum * s).collect();
        }
        x = x_next;
    }
    Err(Error::NonConvergence(format!(
        "exact AL minimizer stalled at gradient norm {:e} (tol {tol:e})",
        norm(&g)
    )))
}

/// Direct solve of `(blockdiag(A_i) + ρ 𝓛⊗I) x = −(b + μ)` for all-quadratic stacks.
pub fn exact_al_minimizer_quadratic(stack: &ObjectiveStack, net: &NetworkModel, mu: &[f64], rho: f64) -> Result<Vec<f64>> {
    let n = stack.node_count();
    let d = stack.dim();
    if mu.len() != n * d {
        return Err(Error::DimensionMismatch { expected: n * d, got: mu.len() });
    }
    let lap = net.spectrum().laplacian();
    let mut m = DMatrix::zeros(n * d, n * d);
    let mut rhs = DVector::zeros(n * d);
    for i in 0..n {
        let NodeCost::Quadratic(q) = stack.cost(i) else {
            return Err(Error::InvalidArgument("direct AL solve needs quadratic costs".into()));
        };
        for r in 0..d {
            for c in 0..d {
                m[(i * d + r, i * d + c)] += q.a()[(r, c)];
            }
            rhs[i * d + r] = -(q.b()[r] + block(mu, i, d)[r]);
        }
        for j in 0..n {
            for r in 0..d {
                m[(i * d + r, j * d + r)] += rho * lap[(i, j)];
            }
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::NonConvergence("AL system is not positive definite".into()))?;
    Ok(chol.solve(&rhs).as_slice().to_vec())
}
