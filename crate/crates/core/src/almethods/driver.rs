use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::network::NetworkModel;
use crate::objective::ObjectiveStack;

use super::config::{AlgorithmConfig, Variant};
use super::policy::{
    GradientSteps, InnerPolicy, JacobiSweeps, RandomizedGaussSeidel, RandomizedGradient,
};
use super::schedule::ScheduleStream;
use super::state::PrimalDualState;
use super::trace::{RunTrace, TraceRecord};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Starting point; defaults to zero primal and dual variables.
    pub initial: Option<PrimalDualState>,
    /// Scheduling of the per-node solves inside a Jacobi sweep.
    pub execution: Execution,
    /// Full `x̄` recomputation check after every randomized tick.
    pub check_xbar: bool,
}

/// Generic inexact AL loop: `x(k+1) = policy(x(k), μ(k))`, then
/// `μ(k+1) = μ(k) + α(𝓛⊗I)x(k+1)`, for `k_max` outer iterations.
pub fn run_inexact_al<P: InnerPolicy + ?Sized>(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    alpha: f64,
    policy: &mut P,
    k_max: usize,
    initial: PrimalDualState,
) -> Result<RunTrace> {
    let n = net.node_count();
    if stack.node_count() != n {
        return Err(Error::DimensionMismatch { expected: n, got: stack.node_count() });
    }
    if initial.dim() != stack.dim() || initial.x.len() != n * stack.dim() {
        return Err(Error::DimensionMismatch { expected: n * stack.dim(), got: initial.x.len() });
    }
    let start = Instant::now();
    let mut state = initial;
    let mut record = TraceRecord {
        k: state.k,
        x: state.x.clone(),
        mu: state.mu.clone(),
        transmissions: 0,
        inner_grad_evals: 0,
        prox_grad_evals: 0,
        inner_iterations: 0,
        elapsed_secs: 0.0,
    };
    let mut records = Vec::with_capacity(k_max + 1);
    records.push(record.clone());
    for _ in 0..k_max {
        let c = policy.advance(stack, net, &mut state)?;
        state.apply_dual_update(alpha);
        state.k += 1;
        record = TraceRecord {
            k: state.k,
            x: state.x.clone(),
            mu: state.mu.clone(),
            transmissions: record.transmissions + c.transmissions,
            inner_grad_evals: record.inner_grad_evals + c.inner_grad_evals,
            prox_grad_evals: record.prox_grad_evals + c.prox_grad_evals,
            inner_iterations: c.inner_iterations,
            elapsed_secs: start.elapsed().as_secs_f64(),
        };
        records.push(record.clone());
    }
    Ok(RunTrace {
        config: None,
        dim: stack.dim(),
        records,
    })
}

/// Run the variant named in `cfg`.
pub fn run(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    cfg: &AlgorithmConfig,
    k_max: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    cfg.validate(stack)?;
    let initial = opts
        .initial
        .clone()
        .unwrap_or_else(|| PrimalDualState::zeros(net, stack.dim()));
    let mut trace = match cfg.variant {
        Variant::DetJacobi => {
            let mut p = JacobiSweeps {
                tau: cfg.tau,
                rho: cfg.rho,
                budget: cfg.prox,
                execution: opts.execution,
            };
            run_inexact_al(stack, net, cfg.alpha, &mut p, k_max, initial)?
        }
        Variant::DetGradient => {
            let mut p = GradientSteps {
                tau: cfg.tau,
                rho: cfg.rho,
                beta: cfg.beta,
            };
            run_inexact_al(stack, net, cfg.alpha, &mut p, k_max, initial)?
        }
        Variant::RandGaussSeidel => {
            let mut p = RandomizedGaussSeidel {
                rho: cfg.rho,
                budget: cfg.prox,
                schedules: ScheduleStream::new(net.node_count(), cfg.tau as f64, cfg.seed),
                check_xbar: opts.check_xbar,
            };
            run_inexact_al(stack, net, cfg.alpha, &mut p, k_max, initial)?
        }
        Variant::RandGradient => {
            let mut p = RandomizedGradient {
                rho: cfg.rho,
                beta: cfg.beta,
                schedules: ScheduleStream::new(net.node_count(), cfg.tau as f64, cfg.seed),
                check_xbar: opts.check_xbar,
            };
            run_inexact_al(stack, net, cfg.alpha, &mut p, k_max, initial)?
        }
    };
    trace.config = Some(*cfg);
    Ok(trace)
}

fn expect_variant(cfg: &AlgorithmConfig, v: Variant) -> Result<()> {
    if cfg.variant != v {
        return Err(Error::Config(format!("expected variant {v}, got {}", cfg.variant)));
    }
    Ok(())
}

/// Deterministic Jacobi prox sweeps.
pub fn run_det_jacobi(stack: &ObjectiveStack, net: &NetworkModel, cfg: &AlgorithmConfig, k_max: usize, opts: &RunOptions) -> Result<RunTrace> {
    expect_variant(cfg, Variant::DetJacobi)?;
    run(stack, net, cfg, k_max, opts)
}

/// Deterministic gradient steps; needs `β ≤ 1/(h_max + ρ)`.
pub fn run_det_gradient(stack: &ObjectiveStack, net: &NetworkModel, cfg: &AlgorithmConfig, k_max: usize, opts: &RunOptions) -> Result<RunTrace> {
    expect_variant(cfg, Variant::DetGradient)?;
    run(stack, net, cfg, k_max, opts)
}

/// Randomized Gauss-Seidel on Poisson clocks.
pub fn run_rand_gauss_seidel(stack: &ObjectiveStack, net: &NetworkModel, cfg: &AlgorithmConfig, k_max: usize, opts: &RunOptions) -> Result<RunTrace> {
    expect_variant(cfg, Variant::RandGaussSeidel)?;
    run(stack, net, cfg, k_max, opts)
}

/// Randomized gradient steps on Poisson clocks; needs `β ≤ 1/(h_max + ρ)`.
pub fn run_rand_gradient(stack: &ObjectiveStack, net: &NetworkModel, cfg: &AlgorithmConfig, k_max: usize, opts: &RunOptions) -> Result<RunTrace> {
    expect_variant(cfg, Variant::RandGradient)?;
    run(stack, net, cfg, k_max, opts)
}
