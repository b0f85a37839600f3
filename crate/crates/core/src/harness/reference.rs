//! Centralized reference solution of `min Σ_i f_i(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::objective::ObjectiveStack;

/// Relative gradient-norm tolerance of [`reference_solve`].
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

const MAX_NEWTON_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub grad_norm_at_solution: f64,
    /// `f(0)`, the normalizer of the relative cost error.
    pub f_zero: f64,
}

impl ReferenceSolution {
    /// `f(0) − f*`.
    pub fn cost_gap(&self) -> f64 {
        self.f_zero - self.f_star
    }
}

/// Damped Newton from the origin until `‖∇f(x)‖ ≤ 1e−12·max(1, ‖∇f(0)‖)`.
pub fn reference_solve(stack: &ObjectiveStack) -> Result<ReferenceSolution> {
    let d = stack.dim();
    let mut x = vec![0.0; d];
    let f_zero = stack.eval_aggregate(&x)?;
    let mut f = f_zero;
    let mut g = stack.grad_aggregate(&x)?;
    let tol = REFERENCE_TOLERANCE * norm(&g).max(1.0);
    for _ in 0..MAX_NEWTON_STEPS {
        let gn = norm(&g);
        if gn <= tol {
            return Ok(ReferenceSolution {
                x_star: x,
                f_star: f,
                grad_norm_at_solution: gn,
                f_zero,
            });
        }
        let h = stack.hessian_aggregate(&x)?;
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::NonConvergence("aggregate Hessian is not positive definite".into()))?;
        let step = chol.solve(&nalgebra::DVector::from_column_slice(&g));
        let decrement: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();
        // Once the predicted decrease is at the rounding level of f the
        // Armijo test carries no information; take the pure Newton step and
        // accept it only if it shrinks the gradient.
        let rounding = 1e3 * f64::EPSILON * f.abs().max(1.0);
        let mut accepted = None;
        if decrement > rounding {
            let mut t = 1.0;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - t * si).collect();
                let fc = stack.eval_aggregate(&cand)?;
                if fc <= f - 0.25 * t * decrement {
                    accepted = Some((cand, fc));
                    break;
                }
                t *= 0.5;
            }
        }
        let (cand, fc) = match accepted {
            Some(c) => c,
            None => {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - si).collect();
                let gc = stack.grad_aggregate(&cand)?;
                if norm(&gc) >= gn {
                    return Err(Error::NonConvergence(format!(
                        "reference solver stalled at gradient norm {gn:e} (target {tol:e})"
                    )));
                }
                let fc = stack.eval_aggregate(&cand)?;
                (cand, fc)
            }
        };
        x = cand;
        f = fc;
        g = stack.grad_aggregate(&x)?;
    }
    Err(Error::NonConvergence(format!(
        "reference solver exceeded {MAX_NEWTON_STEPS} Newton steps (gradient norm {:e})",
        norm(&g)
    )))
}
