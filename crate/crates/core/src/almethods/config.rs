use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_solve::SolverBudget;
use crate::objective::ObjectiveStack;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    DetJacobi,
    DetGradient,
    RandGaussSeidel,
    RandGradient,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::DetJacobi,
        Variant::DetGradient,
        Variant::RandGaussSeidel,
        Variant::RandGradient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::DetJacobi => "det_jacobi",
            Variant::DetGradient => "det_gradient",
            Variant::RandGaussSeidel => "rand_gauss_seidel",
            Variant::RandGradient => "rand_gradient",
        }
    }

    pub fn uses_gradient_steps(self) -> bool {
        matches!(self, Variant::DetGradient | Variant::RandGradient)
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Variant::RandGaussSeidel | Variant::RandGradient)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// Parameters shared by all nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmConfig {
    pub variant: Variant,
    /// Dual step size α.
    pub alpha: f64,
    /// AL penalty ρ.
    pub rho: f64,
    /// Primal step size β (gradient variants only).
    pub beta: f64,
    /// Inner iterations per outer iteration; expected per-node ticks for randomized variants.
    pub tau: u32,
    pub seed: u64,
    pub prox: SolverBudget,
}

impl AlgorithmConfig {
    pub fn new(variant: Variant, alpha: f64, rho: f64, beta: f64, tau: u32) -> Self {
        AlgorithmConfig {
            variant,
            alpha,
            rho,
            beta,
            tau,
            seed: 0,
            prox: SolverBudget::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_prox(mut self, prox: SolverBudget) -> Self {
        self.prox = prox;
        self
    }

    /// Parameter checks; gradient variants also need `β ≤ 1/(h_max + ρ)`.
    pub fn validate(&self, stack: &ObjectiveStack) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::Config(format!("rho must be non-negative, got {}", self.rho)));
        }
        if self.tau < 1 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        if !(self.prox.epsilon > 0.0) {
            return Err(Error::Config("prox epsilon must be positive".into()));
        }
        if self.variant.uses_gradient_steps() {
            let limit = 1.0 / (stack.h_max() + self.rho);
            if !(self.beta > 0.0) || self.beta > limit * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "beta = {} outside (0, 1/(h_max + rho)] = (0, {limit}]",
                    self.beta
                )));
            }
        }
        Ok(())
    }
}
