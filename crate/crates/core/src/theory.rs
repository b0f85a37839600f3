//! Rate certificates: inner contraction factors, the outer convergence
//! factor `r`, the a-priori error bound, `τ` recipes, and the diagnostic
//! quantities (saddle residuals, Lyapunov value) used to check them.

use serde::{Deserialize, Serialize};

use crate::almethods::{AlgorithmConfig, Variant};
use crate::error::{Error, Result};
use crate::linalg::{block, block_sum, dist, norm, replicate, sub};
use crate::network::{LaplacianSpectrum, NetworkModel};
use crate::objective::ObjectiveStack;

/// `(ρ/(ρ + h_min))^τ`: per-outer contraction of `τ` Jacobi sweeps.
pub fn xi_det_jacobi(rho: f64, h_min: f64, tau: u32) -> f64 {
    (rho / (rho + h_min)).powi(tau as i32)
}

/// `(1 − β h_min)^τ`: per-outer contraction of `τ` gradient steps.
pub fn xi_det_gradient(beta: f64, h_min: f64, tau: u32) -> Result<f64> {
    let bh = beta * h_min;
    if !(bh > 0.0 && bh < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < beta h_min < 1, got {bh}")));
    }
    Ok((1.0 - bh).powi(tau as i32))
}

/// `N (1 − √(1 − s/N))` evaluated without cancellation as `s / (1 + √(1 − s/N))`.
fn per_tick_rate(n: usize, s: f64) -> f64 {
    let n = n as f64;
    s / (1.0 + (1.0 - s / n).sqrt())
}

/// `η = N(1 − √(1 − (1 − δ²)/N))`, `δ = ρ/(ρ + h_min)`.
pub fn eta_rand_gs(n: usize, rho: f64, h_min: f64) -> f64 {
    let delta = rho / (rho + h_min);
    per_tick_rate(n, 1.0 - delta * delta)
}

/// `η′ = N(1 − √(1 − β h_min (1 − β h_min)/N))`.
pub fn eta_rand_gradient(n: usize, beta: f64, h_min: f64) -> Result<f64> {
    let bh = beta * h_min;
    if !(bh > 0.0 && bh < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < beta h_min < 1, got {bh}")));
    }
    Ok(per_tick_rate(n, bh * (1.0 - bh)))
}

/// Parameter recipes that fix `(α, ρ, β)` from the Hessian bounds and `τ`
/// from `(γ, λ_2, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    /// `ρ = h_max`, `α = h_min + ρ`, Jacobi.
    Section4Jacobi,
    /// `ρ = h_max`, `β = 1/(h_max + ρ)`, `α = h_min + ρ`, gradient.
    Section4Gradient,
    /// `α = ρ = h_min`, Jacobi.
    Section5Jacobi,
    /// `α = ρ = h_min`, `β = 1/(ρ + h_max)`, gradient.
    Section5Gradient,
    /// `α = ρ = h_min`, randomized Gauss-Seidel.
    Section5RandGs,
    /// `α = ρ = h_min`, `β = 1/(ρ + h_max)`, randomized gradient.
    Section5RandGradient,
}

impl Recipe {
    pub const ALL: [Recipe; 6] = [
        Recipe::Section4Jacobi,
        Recipe::Section4Gradient,
        Recipe::Section5Jacobi,
        Recipe::Section5Gradient,
        Recipe::Section5RandGs,
        Recipe::Section5RandGradient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Section4Jacobi => "section4_jacobi",
            Recipe::Section4Gradient => "section4_gradient",
            Recipe::Section5Jacobi => "section5_jacobi",
            Recipe::Section5Gradient => "section5_gradient",
            Recipe::Section5RandGs => "section5_rand_gs",
            Recipe::Section5RandGradient => "section5_rand_gradient",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Recipe::Section4Jacobi | Recipe::Section5Jacobi => Variant::DetJacobi,
            Recipe::Section4Gradient | Recipe::Section5Gradient => Variant::DetGradient,
            Recipe::Section5RandGs => Variant::RandGaussSeidel,
            Recipe::Section5RandGradient => Variant::RandGradient,
        }
    }

    /// `(α, ρ, β)`. `β` is 0 for prox-based variants.
    pub fn parameters(self, h_min: f64, h_max: f64) -> (f64, f64, f64) {
        match self {
            Recipe::Section4Jacobi => (h_min + h_max, h_max, 0.0),
            Recipe::Section4Gradient => (h_min + h_max, h_max, 1.0 / (2.0 * h_max)),
            Recipe::Section5Jacobi | Recipe::Section5RandGs => (h_min, h_min, 0.0),
            Recipe::Section5Gradient | Recipe::Section5RandGradient => (h_min, h_min, 1.0 / (h_min + h_max)),
        }
    }

    /// Full configuration for a stack and network.
    pub fn configure(self, stack: &ObjectiveStack, net: &NetworkModel) -> AlgorithmConfig {
        let (alpha, rho, beta) = self.parameters(stack.h_min(), stack.h_max());
        let tau = select_tau(self, stack.condition_number(), net.lambda2(), net.node_count());
        AlgorithmConfig::new(self.variant(), alpha, rho, beta, tau)
    }
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown recipe `{s}`")))
    }
}

/// Inner iteration count prescribed by `recipe`.
pub fn select_tau(recipe: Recipe, gamma: f64, lambda2: f64, n: usize) -> u32 {
    let target = (3.0 * (1.0 + gamma) / lambda2).ln();
    let tau = match recipe {
        Recipe::Section4Jacobi => (6.0 * gamma / lambda2).ln() / (1.0 + 1.0 / gamma).ln(),
        Recipe::Section4Gradient => (6.0 * gamma / lambda2).ln() / (1.0 + 1.0 / (2.0 * gamma - 1.0)).ln(),
        Recipe::Section5Jacobi => target / 2f64.ln(),
        Recipe::Section5Gradient => target / ((gamma + 1.0) / gamma).ln(),
        Recipe::Section5RandGs => {
            let nf = n as f64;
            target.abs() / (nf * (1.0 - (1.0 - 3.0 / (4.0 * nf)).sqrt()))
        }
        Recipe::Section5RandGradient => {
            let nf = n as f64;
            let s = gamma / (nf * (1.0 + gamma) * (1.0 + gamma));
            target.abs() / (nf * (1.0 - (1.0 - s).sqrt()))
        }
    };
    (tau.ceil() as u32).max(1)
}

/// `ξ` for a configured variant: the deterministic contraction factors or
/// `e^{−ητ}`, `e^{−η′τ}` for the randomized ones.
pub fn xi_for(cfg: &AlgorithmConfig, h_min: f64, n: usize) -> Result<f64> {
    Ok(match cfg.variant {
        Variant::DetJacobi => xi_det_jacobi(cfg.rho, h_min, cfg.tau),
        Variant::DetGradient => xi_det_gradient(cfg.beta, h_min, cfg.tau)?,
        Variant::RandGaussSeidel => (-eta_rand_gs(n, cfg.rho, h_min) * cfg.tau as f64).exp(),
        Variant::RandGradient => (-eta_rand_gradient(n, cfg.beta, h_min)? * cfg.tau as f64).exp(),
    })
}

/// Largest `ξ` the rate conditions tolerate (strictly below this).
pub fn xi_threshold(lambda2: f64, h_min: f64, h_max: f64, rho: f64) -> f64 {
    lambda2 * h_min / (3.0 * (rho + h_max))
}

/// `r = max{½ + 3ξ/2, 1 − αλ_2/(ρ + h_max) + 3αξ/h_min}`.
pub fn convergence_factor(xi: f64, alpha: f64, rho: f64, lambda2: f64, h_min: f64, h_max: f64) -> f64 {
    let a = 0.5 + 1.5 * xi;
    let b = 1.0 - alpha * lambda2 / (rho + h_max) + 3.0 * alpha * xi / h_min;
    a.max(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub variant: Variant,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
    pub tau: u32,
    pub node_count: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub gamma: f64,
    pub lambda2: f64,
    /// `η` (Gauss-Seidel) or `η′` (gradient) for randomized variants.
    pub eta: Option<f64>,
    pub xi: f64,
    pub xi_threshold: f64,
    /// `α ≤ h_min + ρ`.
    pub alpha_ok: bool,
    /// `ξ < λ_2 h_min / (3(ρ + h_max))`.
    pub xi_ok: bool,
    pub r: f64,
    pub d_x: f64,
    pub d_mu: f64,
    /// `√N max{D_x, 2 D_μ/(√λ_2 h_min)}`.
    pub bound_constant: f64,
}

impl RateCertificate {
    pub fn conditions_hold(&self) -> bool {
        self.alpha_ok && self.xi_ok
    }

    pub fn ensure_conditions(&self) -> Result<()> {
        let mut failed = Vec::new();
        if !self.alpha_ok {
            failed.push(format!("alpha = {} > h_min + rho = {}", self.alpha, self.h_min + self.rho));
        }
        if !self.xi_ok {
            failed.push(format!("xi = {:e} >= {:e}", self.xi, self.xi_threshold));
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::ConditionsViolated(failed.join("; ")))
        }
    }

    /// `r^k · bound_constant`: a-priori bound on `‖x_i(k) − x*‖`.
    pub fn primal_bound(&self, k: usize) -> f64 {
        self.r.powi(k as i32) * self.bound_constant
    }

    /// Bound on the averaged relative cost error at iteration `k`. Since
    /// `∇²f ⪯ N h_max I`, `f(x_i) − f* ≤ (N h_max / 2)‖x_i − x*‖²`, hence
    /// `(1/N)Σ_i (f(x_i) − f*)/(f(0) − f*) ≤ N h_max (r^k B)² / (2 (f(0) − f*))`.
    pub fn relative_cost_bound(&self, k: usize, cost_gap_at_zero: f64) -> f64 {
        let e = self.primal_bound(k);
        self.node_count as f64 * self.h_max * e * e / (2.0 * cost_gap_at_zero)
    }

    /// Outer iterations after which the a-priori bound guarantees relative
    /// primal error `target`, i.e. `⌈log(target · ‖x(0) − 1⊗x*‖ / B) / log r⌉`.
    pub fn iterations_for(&self, target: f64, initial_error: f64) -> Option<f64> {
        if !(self.r < 1.0) || self.bound_constant == 0.0 {
            return None;
        }
        Some(((target * initial_error / self.bound_constant).ln() / self.r.ln()).ceil().max(0.0))
    }
}

/// Evaluate ξ, both conditions, `r` and the error-bound constant. `x_star` is
/// the reference solution and `x0` the common primal initialization.
pub fn evaluate_certificate(
    cfg: &AlgorithmConfig,
    stack: &ObjectiveStack,
    net: &NetworkModel,
    x_star: &[f64],
    x0: &[f64],
) -> Result<RateCertificate> {
    let n = stack.node_count();
    let h_min = stack.h_min();
    let h_max = stack.h_max();
    let lambda2 = net.lambda2();
    let xi = xi_for(cfg, h_min, n)?;
    let eta = match cfg.variant {
        Variant::RandGaussSeidel => Some(eta_rand_gs(n, cfg.rho, h_min)),
        Variant::RandGradient => Some(eta_rand_gradient(n, cfg.beta, h_min)?),
        _ => None,
    };
    let threshold = xi_threshold(lambda2, h_min, h_max, cfg.rho);
    let d_x = dist(x0, x_star);
    let d_mu = (stack
        .costs()
        .iter()
        .map(|c| {
            let g = c.gradient(x_star);
            crate::linalg::dot(&g, &g)
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let bound_constant = (n as f64).sqrt() * d_x.max(2.0 * d_mu / (lambda2.sqrt() * h_min));
    Ok(RateCertificate {
        variant: cfg.variant,
        alpha: cfg.alpha,
        rho: cfg.rho,
        beta: cfg.beta,
        tau: cfg.tau,
        node_count: n,
        h_min,
        h_max,
        gamma: h_max / h_min,
        lambda2,
        eta,
        xi,
        xi_threshold: threshold,
        alpha_ok: cfg.alpha <= h_min + cfg.rho,
        xi_ok: xi < threshold,
        r: convergence_factor(xi, cfg.alpha, cfg.rho, lambda2, h_min, h_max),
        d_x,
        d_mu,
        bound_constant,
    })
}

/// Like [`evaluate_certificate`] but fails when a rate condition is violated.
pub fn certificate(
    cfg: &AlgorithmConfig,
    stack: &ObjectiveStack,
    net: &NetworkModel,
    x_star: &[f64],
    x0: &[f64],
) -> Result<RateCertificate> {
    let c = evaluate_certificate(cfg, stack, net, x_star, x0)?;
    c.ensure_conditions()?;
    Ok(c)
}

/// `(x•, μ•) = (1⊗x*, −∇F(1⊗x*))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddlePoint {
    pub x_bullet: Vec<f64>,
    pub mu_bullet: Vec<f64>,
}

impl SaddlePoint {
    pub fn from_solution(stack: &ObjectiveStack, x_star: &[f64]) -> Result<Self> {
        let x_bullet = replicate(x_star, stack.node_count());
        let mu_bullet = stack.grad_stack(&x_bullet)?.into_iter().map(|g| -g).collect();
        Ok(SaddlePoint { x_bullet, mu_bullet })
    }
}

/// Norms of `∇F(x) + μ + ρ(𝓛⊗I)x`, `(𝓛⊗I)x` and `(1⊗I)ᵀμ`.
pub fn saddle_residuals(
    stack: &ObjectiveStack,
    net: &NetworkModel,
    x: &[f64],
    mu: &[f64],
    rho: f64,
) -> Result<(f64, f64, f64)> {
    let d = stack.dim();
    let grad = stack.grad_stack(x)?;
    if mu.len() != grad.len() {
        return Err(Error::DimensionMismatch { expected: grad.len(), got: mu.len() });
    }
    let lx = net.laplacian_apply(x, d);
    let stationarity: Vec<f64> = (0..grad.len()).map(|k| grad[k] + mu[k] + rho * lx[k]).collect();
    Ok((norm(&stationarity), norm(&lx), norm(&block_sum(mu, d))))
}

/// `max{‖x − x•‖, (2/h_min)‖(Λ̂^{−1/2}Qᵀ ⊗ I)(μ − μ•)‖}`.
pub fn lyapunov_value(
    x: &[f64],
    mu: &[f64],
    spectrum: &LaplacianSpectrum,
    saddle: &SaddlePoint,
    h_min: f64,
) -> f64 {
    let d = x.len() / spectrum.laplacian().nrows();
    let primal = dist(x, &saddle.x_bullet);
    let dual_err = sub(mu, &saddle.mu_bullet);
    let dual = 2.0 / h_min * norm(&spectrum.whitened_projection(&dual_err, d));
    primal.max(dual)
}

/// Largest per-node distance `max_i ‖x_i − x*‖`.
pub fn max_node_error(x: &[f64], x_star: &[f64]) -> f64 {
    let d = x_star.len();
    (0..x.len() / d)
        .map(|i| dist(block(x, i, d), x_star))
        .fold(0.0, f64::max)
}
