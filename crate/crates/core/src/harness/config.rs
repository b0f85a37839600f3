//! Experiment configuration (TOML).
//!
//! ```toml
//! k_max = 300                 # outer iterations per run
//! output_dir = "out"          # overridden by $DAL_OUTPUT_DIR
//! parallel = true             # concurrent per-node solves / runs
//!
//! [network]
//! kind = "geometric"          # geometric | chain | complete | file
//! nodes = 10
//! radius = 0.45               # geometric only
//! seed = 1                    # geometric only
//! # path = "graph.json"       # file only
//! # scaling = [0.55, 0.45]    # W = a I + b W_metropolis
//!
//! [objective]
//! kind = "logistic"           # logistic | quadratic | dataset
//! dim = 15
//! regularization = 1.0        # logistic / dataset
//! seed = 7                    # logistic / quadratic
//! # path = "data.csv"         # dataset only
//!
//! [[algorithm]]
//! name = "jacobi"
//! recipe = "section5_jacobi"  # or variant = "det_jacobi" with alpha, rho, tau
//! tau = 1                     # optional override of any recipe parameter
//! seed = 0                    # randomized variants
//! ```
//!
//! Relative paths are resolved against the configuration file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::almethods::{AlgorithmConfig, Variant};
use crate::error::{Error, Result};
use crate::local_solve::{SolverBudget, DEFAULT_PROX_EPSILON, DEFAULT_PROX_MAX_ITERATIONS};
use crate::network::{DEFAULT_GEOMETRIC_ATTEMPTS, DEFAULT_GEOMETRIC_RADIUS, DEFAULT_SCALING};
use crate::theory::{select_tau, Recipe};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "DAL_OUTPUT_DIR";

pub const DEFAULT_NODES: usize = 10;
pub const DEFAULT_DIM: usize = 15;
pub const DEFAULT_REGULARIZATION: f64 = 1.0;
pub const DEFAULT_K_MAX: usize = 300;

fn default_nodes() -> usize {
    DEFAULT_NODES
}
fn default_radius() -> f64 {
    DEFAULT_GEOMETRIC_RADIUS
}
fn default_attempts() -> usize {
    DEFAULT_GEOMETRIC_ATTEMPTS
}
fn default_scaling() -> [f64; 2] {
    [DEFAULT_SCALING.0, DEFAULT_SCALING.1]
}
fn default_dim() -> usize {
    DEFAULT_DIM
}
fn default_regularization() -> f64 {
    DEFAULT_REGULARIZATION
}
fn default_k_max() -> usize {
    DEFAULT_K_MAX
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkTopology {
    Geometric {
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default = "default_radius")]
        radius: f64,
        seed: u64,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
    Chain {
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    Complete {
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    /// A saved graph file; its weights are used as stored.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    #[serde(flatten)]
    pub topology: NetworkTopology,
    /// `(a, b)` in `W = a I + b W_metropolis`; ignored for graph files.
    #[serde(default = "default_scaling")]
    pub scaling: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Logistic {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_regularization")]
        regularization: f64,
        seed: u64,
    },
    Quadratic {
        #[serde(default = "default_dim")]
        dim: usize,
        seed: u64,
    },
    /// Logistic costs read from a dataset file, one row per node.
    Dataset {
        path: PathBuf,
        #[serde(default = "default_regularization")]
        regularization: f64,
    },
}

/// One run: a recipe (optionally with overrides) or explicit parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    /// Output file stem; defaults to the recipe or variant name.
    pub name: Option<String>,
    pub recipe: Option<Recipe>,
    pub variant: Option<Variant>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub tau: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    pub prox_epsilon: Option<f64>,
    pub prox_max_iterations: Option<u64>,
}

impl AlgorithmSpec {
    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match (self.recipe, self.variant) {
            (Some(r), _) => r.name().to_string(),
            (None, Some(v)) => v.name().to_string(),
            (None, None) => "unnamed".to_string(),
        }
    }

    /// Structural checks that need no problem data.
    pub fn check(&self) -> Result<()> {
        let name = self.display_name();
        match (self.recipe, self.variant) {
            (None, None) => {
                return Err(Error::Config(format!("algorithm `{name}` needs a recipe or a variant")));
            }
            (Some(r), Some(v)) if r.variant() != v => {
                return Err(Error::Config(format!(
                    "algorithm `{name}`: recipe {r} runs {}, not {v}",
                    r.variant()
                )));
            }
            (None, Some(v)) => {
                let mut missing = Vec::new();
                if self.alpha.is_none() {
                    missing.push("alpha");
                }
                if self.rho.is_none() {
                    missing.push("rho");
                }
                if self.tau.is_none() {
                    missing.push("tau");
                }
                if v.uses_gradient_steps() && self.beta.is_none() {
                    missing.push("beta");
                }
                if !missing.is_empty() {
                    return Err(Error::Config(format!(
                        "algorithm `{name}` without a recipe needs {}",
                        missing.join(", ")
                    )));
                }
            }
            _ => {}
        }
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::Config(format!("algorithm name `{name}` is not a valid file stem")));
        }
        Ok(())
    }

    /// Resolve to concrete parameters given the instance's `h_min`, `h_max`,
    /// `λ_2` and `N`.
    pub fn resolve(&self, h_min: f64, h_max: f64, lambda2: f64, n: usize) -> Result<AlgorithmConfig> {
        self.check()?;
        let mut cfg = match self.recipe {
            Some(r) => {
                let (alpha, rho, beta) = r.parameters(h_min, h_max);
                let tau = select_tau(r, h_max / h_min, lambda2, n);
                AlgorithmConfig::new(r.variant(), alpha, rho, beta, tau)
            }
            None => AlgorithmConfig::new(
                self.variant.expect("checked"),
                0.0,
                0.0,
                0.0,
                0,
            ),
        };
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(r) = self.rho {
            cfg.rho = r;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(t) = self.tau {
            cfg.tau = t;
        }
        let budget = SolverBudget::new(
            self.prox_epsilon.unwrap_or(DEFAULT_PROX_EPSILON),
            self.prox_max_iterations.unwrap_or(DEFAULT_PROX_MAX_ITERATIONS),
        )?;
        Ok(cfg.with_seed(self.seed).with_prox(budget))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSpec,
    pub objective: ObjectiveSpec,
    #[serde(rename = "algorithm", default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one [[algorithm]] entry is required".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for a in &self.algorithms {
            a.check()?;
            if !names.insert(a.display_name()) {
                return Err(Error::Config(format!("duplicate algorithm name `{}`", a.display_name())));
            }
        }
        let [a, b] = self.network.scaling;
        if !((a + b - 1.0).abs() < 1e-12 && a > 0.0 && b >= 0.0) {
            return Err(Error::Config(format!("network scaling must satisfy a + b = 1, a > 0, got [{a}, {b}]")));
        }
        match &self.network.topology {
            NetworkTopology::Geometric { nodes, radius, .. } => {
                if *nodes < 2 {
                    return Err(Error::Config("network needs at least 2 nodes".into()));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Config(format!("radius must be positive, got {radius}")));
                }
            }
            NetworkTopology::Chain { nodes } | NetworkTopology::Complete { nodes } => {
                if *nodes < 2 {
                    return Err(Error::Config("network needs at least 2 nodes".into()));
                }
            }
            NetworkTopology::File { .. } => {}
        }
        match &self.objective {
            ObjectiveSpec::Logistic { dim, regularization, .. } => {
                if *dim < 2 {
                    return Err(Error::Config("logistic objective needs dim >= 2".into()));
                }
                if !(*regularization > 0.0) {
                    return Err(Error::Config("regularization must be positive".into()));
                }
            }
            ObjectiveSpec::Quadratic { dim, .. } => {
                if *dim < 1 {
                    return Err(Error::Config("quadratic objective needs dim >= 1".into()));
                }
            }
            ObjectiveSpec::Dataset { regularization, .. } => {
                if !(*regularization > 0.0) {
                    return Err(Error::Config("regularization must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory, honouring [`OUTPUT_DIR_ENV`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.resolve_path(&self.output_dir),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [network]
        kind = "chain"
        nodes = 2
        [objective]
        kind = "quadratic"
        dim = 1
        seed = 0
        [[algorithm]]
        recipe = "section5_jacobi"
    "#;

    #[test]
    fn defaults_applied() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.k_max, 300);
        assert_eq!(c.network.scaling, [0.55, 0.45]);
        assert_eq!(c.algorithms[0].display_name(), "section5_jacobi");
    }

    #[test]
    fn unknown_recipe_rejected() {
        let bad = MINIMAL.replace("section5_jacobi", "section9_magic");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn explicit_parameters_required_without_recipe() {
        let bad = MINIMAL.replace("recipe = \"section5_jacobi\"", "variant = \"det_gradient\"\nalpha = 1.0");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("rho") && err.contains("tau") && err.contains("beta"), "{err}");
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn overrides_replace_recipe_values() {
        let spec = AlgorithmSpec {
            recipe: Some(Recipe::Section5Gradient),
            tau: Some(1),
            ..Default::default()
        };
        let cfg = spec.resolve(1.0, 3.0, 0.5, 4).unwrap();
        assert_eq!(cfg.tau, 1);
        assert_eq!((cfg.alpha, cfg.rho, cfg.beta), (1.0, 1.0, 0.25));
    }
}
