use crate::error::Result;
use crate::exec::Execution;
use crate::linalg::block_mut;
use crate::local_solve::{exact_al_minimizer_from, gradient_step_local, prox_local, ProxProblem, SolverBudget};
use crate::network::NetworkModel;
use crate::objective::ObjectiveStack;

use super::schedule::ScheduleStream;
use super::state::PrimalDualState;

/// Work done by one call to [`InnerPolicy::advance`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub transmissions: u64,
    pub inner_grad_evals: u64,
    pub prox_grad_evals: u64,
    pub inner_iterations: u64,
}

/// Maps `(x(k), μ(k))` to `x(k+1)`. Implementations overwrite `state.x` and
/// must leave `state.xbar` consistent with it; `state.mu` is read-only here.
pub trait InnerPolicy {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState)
        -> Result<StepCounters>;
}

impl<F> InnerPolicy for F
where
    F: FnMut(&ObjectiveStack, &NetworkModel, &mut PrimalDualState) -> Result<StepCounters>,
{
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        self(stack, net, state)
    }
}

/// `x_i ← argmin f_i(y) + (μ_i − ρ x̄_i)ᵀy + (ρ/2)‖y‖²` at a node.
fn prox_at(
    stack: &ObjectiveStack,
    state: &PrimalDualState,
    i: usize,
    rho: f64,
    budget: &SolverBudget,
) -> Result<(Vec<f64>, u64)> {
    let v: Vec<f64> = state
        .mu_block(i)
        .iter()
        .zip(state.xbar_block(i))
        .map(|(m, xb)| m - rho * xb)
        .collect();
    let p = ProxProblem::new(stack.cost(i), rho, &v);
    let out = prox_local(&p, budget, state.x_block(i))?;
    Ok((out.point, out.grad_evals))
}

/// `τ` synchronous Jacobi sweeps; the per-node solves of a sweep run through
/// `execution` and are merged in node order.
#[derive(Clone, Debug)]
pub struct JacobiSweeps {
    pub tau: u32,
    pub rho: f64,
    pub budget: SolverBudget,
    pub execution: Execution,
}

impl InnerPolicy for JacobiSweeps {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        let n = net.node_count();
        let d = state.dim();
        let mut c = StepCounters::default();
        for _ in 0..self.tau {
            let snapshot = &*state;
            let solved = self
                .execution
                .try_map(n, |i| prox_at(stack, snapshot, i, self.rho, &self.budget))?;
            for (i, (point, evals)) in solved.into_iter().enumerate() {
                block_mut(&mut state.x, i, d).copy_from_slice(&point);
                c.prox_grad_evals += evals;
            }
            state.refresh_xbar(net);
            c.transmissions += n as u64;
            c.inner_iterations += 1;
        }
        Ok(c)
    }
}

/// `τ` synchronous gradient steps on `L_a(·; μ(k))`.
#[derive(Clone, Debug)]
pub struct GradientSteps {
    pub tau: u32,
    pub rho: f64,
    pub beta: f64,
}

impl InnerPolicy for GradientSteps {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        let n = net.node_count();
        let d = state.dim();
        let mut c = StepCounters::default();
        let mut next = vec![0.0; n * d];
        for _ in 0..self.tau {
            for i in 0..n {
                let xi = gradient_step_local(
                    stack.cost(i),
                    state.x_block(i),
                    state.xbar_block(i),
                    state.mu_block(i),
                    self.beta,
                    self.rho,
                );
                block_mut(&mut next, i, d).copy_from_slice(&xi);
            }
            std::mem::swap(&mut state.x, &mut next);
            state.refresh_xbar(net);
            c.inner_grad_evals += n as u64;
            c.transmissions += n as u64;
            c.inner_iterations += 1;
        }
        Ok(c)
    }
}

/// One Poisson-clock outer interval of randomized Gauss-Seidel prox updates.
#[derive(Clone, Debug)]
pub struct RandomizedGaussSeidel {
    pub rho: f64,
    pub budget: SolverBudget,
    pub schedules: ScheduleStream,
    /// Recompute all of `x̄` after each tick and assert the cached copy agrees.
    pub check_xbar: bool,
}

impl InnerPolicy for RandomizedGaussSeidel {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        let d = state.dim();
        let schedule = self.schedules.next_schedule();
        let mut c = StepCounters::default();
        for &i in &schedule.nodes {
            let (point, evals) = prox_at(stack, state, i, self.rho, &self.budget)?;
            block_mut(&mut state.x, i, d).copy_from_slice(&point);
            state.refresh_xbar_around(net, i);
            if self.check_xbar {
                assert_xbar_fresh(net, state);
            }
            c.prox_grad_evals += evals;
            c.transmissions += 1;
            c.inner_iterations += 1;
        }
        Ok(c)
    }
}

/// Randomized ticks where the selected node takes one gradient step.
#[derive(Clone, Debug)]
pub struct RandomizedGradient {
    pub rho: f64,
    pub beta: f64,
    pub schedules: ScheduleStream,
    pub check_xbar: bool,
}

impl InnerPolicy for RandomizedGradient {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        let d = state.dim();
        let schedule = self.schedules.next_schedule();
        let mut c = StepCounters::default();
        for &i in &schedule.nodes {
            let xi = gradient_step_local(
                stack.cost(i),
                state.x_block(i),
                state.xbar_block(i),
                state.mu_block(i),
                self.beta,
                self.rho,
            );
            block_mut(&mut state.x, i, d).copy_from_slice(&xi);
            state.refresh_xbar_around(net, i);
            if self.check_xbar {
                assert_xbar_fresh(net, state);
            }
            c.inner_grad_evals += 1;
            c.transmissions += 1;
            c.inner_iterations += 1;
        }
        Ok(c)
    }
}

fn assert_xbar_fresh(net: &NetworkModel, state: &PrimalDualState) {
    let drift = state.xbar_drift(net);
    assert!(drift <= 1e-12, "cached neighbor averages drifted by {drift:e}");
}

/// Jumps to the exact AL minimizer: the classical method of multipliers.
#[derive(Clone, Debug)]
pub struct ExactMinimizer {
    pub rho: f64,
    pub tol: f64,
}

impl InnerPolicy for ExactMinimizer {
    fn advance(&mut self, stack: &ObjectiveStack, net: &NetworkModel, state: &mut PrimalDualState) -> Result<StepCounters> {
        state.x = exact_al_minimizer_from(stack, net, &state.mu, self.rho, self.tol, Some(&state.x))?;
        state.refresh_xbar(net);
        Ok(StepCounters::default())
    }
}

/// Leaves the primal iterate unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl InnerPolicy for Identity {
    fn advance(&mut self, _: &ObjectiveStack, _: &NetworkModel, _: &mut PrimalDualState) -> Result<StepCounters> {
        Ok(StepCounters::default())
    }
}

