//! Per-node strongly convex costs and the stacked objective `F(x) = Σ f_i(x_i)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block, dot};

/// `f(x) = ½ xᵀ A x + bᵀ x + c` with `A` symmetric positive definite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCost {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    h_min: f64,
    h_max: f64,
}

impl QuadraticCost {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.len() != d || d == 0 {
            return Err(Error::DimensionMismatch { expected: d, got: b.len() });
        }
        let sym = (&a + a.transpose()) * 0.5;
        if (&sym - &a).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(Error::InvalidArgument("quadratic matrix must be symmetric".into()));
        }
        let ev = SymmetricEigen::new(sym.clone()).eigenvalues;
        let h_min = ev.min();
        let h_max = ev.max();
        if h_min <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "quadratic matrix must be positive definite, smallest eigenvalue {h_min:e}"
            )));
        }
        Ok(QuadraticCost { a: sym, b, c, h_min, h_max })
    }

    /// `½ h ‖x - center‖²`.
    pub fn isotropic(center: &[f64], h: f64) -> Result<Self> {
        let d = center.len();
        let a = DMatrix::identity(d, d) * h;
        let b = DVector::from_iterator(d, center.iter().map(|v| -h * v));
        let c = 0.5 * h * dot(center, center);
        Self::new(a, b, c)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn a_times(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..d {
                s += self.a[(r, k)] * x[k];
            }
            *o = s;
        }
    }
}

/// Regularized logistic loss of one sample:
/// `f(x) = log(1 + exp(-cᵀx)) + (P/(2N)) ‖x‖²` with `c = (b aᵀ, b)ᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticCost {
    feature: Vec<f64>,
    label: f64,
    regularization: f64,
    node_count: usize,
    c: Vec<f64>,
}

impl LogisticCost {
    pub fn new(feature: Vec<f64>, label: f64, regularization: f64, node_count: usize) -> Result<Self> {
        if label != 1.0 && label != -1.0 {
            return Err(Error::InvalidArgument(format!("label must be +1 or -1, got {label}")));
        }
        if !(regularization > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization must be positive, got {regularization}"
            )));
        }
        if node_count == 0 {
            return Err(Error::InvalidArgument("node count must be positive".into()));
        }
        let mut c: Vec<f64> = feature.iter().map(|v| label * v).collect();
        c.push(label);
        Ok(LogisticCost {
            feature,
            label,
            regularization,
            node_count,
            c,
        })
    }

    pub fn feature(&self) -> &[f64] {
        &self.feature
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Stacked `c_i = (b_i a_iᵀ, b_i)ᵀ`; the intercept is the last coordinate.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    fn ridge(&self) -> f64 {
        self.regularization / self.node_count as f64
    }
}

/// `(P/N, P/N + ¼‖c_i‖²)`, using `‖c cᵀ‖ = ‖c‖²` and the logistic curvature bound ¼.
pub fn logistic_hessian_bounds(cost: &LogisticCost) -> (f64, f64) {
    let r = cost.ridge();
    (r, r + 0.25 * dot(&cost.c, &cost.c))
}

/// `log(1 + exp(-z))` without overflow.
fn softplus_neg(z: f64) -> f64 {
    (-z.abs()).exp().ln_1p() + (-z).max(0.0)
}

/// `1 / (1 + exp(z))`.
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// A node's private cost `f_i` with certified Hessian bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeCost {
    Quadratic(QuadraticCost),
    Logistic(LogisticCost),
}

impl NodeCost {
    pub fn dim(&self) -> usize {
        match self {
            NodeCost::Quadratic(q) => q.b.len(),
            NodeCost::Logistic(l) => l.c.len(),
        }
    }

    /// `(h_min_i, h_max_i)`.
    pub fn hessian_bounds(&self) -> (f64, f64) {
        match self {
            NodeCost::Quadratic(q) => (q.h_min, q.h_max),
            NodeCost::Logistic(l) => logistic_hessian_bounds(l),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            NodeCost::Quadratic(q) => {
                let mut ax = vec![0.0; x.len()];
                q.a_times(x, &mut ax);
                0.5 * dot(x, &ax) + dot(q.b.as_slice(), x) + q.c
            }
            NodeCost::Logistic(l) => softplus_neg(dot(&l.c, x)) + 0.5 * l.ridge() * dot(x, x),
        }
    }

    /// Writes `∇f_i(x)` into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            NodeCost::Quadratic(q) => {
                q.a_times(x, out);
                for (o, b) in out.iter_mut().zip(q.b.iter()) {
                    *o += b;
                }
            }
            NodeCost::Logistic(l) => {
                let s = sigmoid_neg(dot(&l.c, x));
                let r = l.ridge();
                for ((o, ci), xi) in out.iter_mut().zip(&l.c).zip(x) {
                    *o = -s * ci + r * xi;
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        match self {
            NodeCost::Quadratic(q) => q.a.clone(),
            NodeCost::Logistic(l) => {
                let z = dot(&l.c, x);
                let w = sigmoid_neg(z) * sigmoid_neg(-z);
                let c = DVector::from_column_slice(&l.c);
                DMatrix::identity(c.len(), c.len()) * l.ridge() + &c * c.transpose() * w
            }
        }
    }
}

/// The `N` node costs of one problem instance, all of dimension `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveStack {
    costs: Vec<NodeCost>,
    dim: usize,
    h_min: f64,
    h_max: f64,
}

impl ObjectiveStack {
    pub fn new(costs: Vec<NodeCost>) -> Result<Self> {
        let first = costs
            .first()
            .ok_or_else(|| Error::InvalidArgument("objective stack needs at least one cost".into()))?;
        let dim = first.dim();
        let mut h_min = f64::INFINITY;
        let mut h_max = 0.0_f64;
        for c in &costs {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
            }
            let (lo, hi) = c.hessian_bounds();
            if !(lo > 0.0 && lo <= hi) {
                return Err(Error::InvalidArgument(format!("invalid Hessian bounds ({lo}, {hi})")));
            }
            h_min = h_min.min(lo);
            h_max = h_max.max(hi);
        }
        Ok(ObjectiveStack { costs, dim, h_min, h_max })
    }

    pub fn node_count(&self) -> usize {
        self.costs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn costs(&self) -> &[NodeCost] {
        &self.costs
    }

    pub fn cost(&self, i: usize) -> &NodeCost {
        &self.costs[i]
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn is_quadratic(&self) -> bool {
        self.costs.iter().all(|c| matches!(c, NodeCost::Quadratic(_)))
    }

    fn check_stacked(&self, x: &[f64]) -> Result<()> {
        let expected = self.dim * self.costs.len();
        if x.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: x.len() });
        }
        Ok(())
    }

    fn check_single(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// `F(x) = Σ_i f_i(x_i)`.
    pub fn eval_stack(&self, x: &[f64]) -> Result<f64> {
        self.check_stacked(x)?;
        Ok(self
            .costs
            .iter()
            .enumerate()
            .map(|(i, c)| c.value(block(x, i, self.dim)))
            .sum())
    }

    /// `∇F(x) = (∇f_1(x_1), …, ∇f_N(x_N))`.
    pub fn grad_stack(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_stacked(x)?;
        let d = self.dim;
        let mut g = vec![0.0; x.len()];
        for (i, (c, gi)) in self.costs.iter().zip(g.chunks_exact_mut(d)).enumerate() {
            c.gradient_into(block(x, i, d), gi);
        }
        Ok(g)
    }

    /// Aggregate `f(x) = Σ_i f_i(x)` at a single point.
    pub fn eval_aggregate(&self, x: &[f64]) -> Result<f64> {
        self.check_single(x)?;
        Ok(self.costs.iter().map(|c| c.value(x)).sum())
    }

    pub fn grad_aggregate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_single(x)?;
        let mut g = vec![0.0; self.dim];
        let mut gi = vec![0.0; self.dim];
        for c in &self.costs {
            c.gradient_into(x, &mut gi);
            for (a, b) in g.iter_mut().zip(&gi) {
                *a += b;
            }
        }
        Ok(g)
    }

    pub fn hessian_aggregate(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_single(x)?;
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for c in &self.costs {
            h += c.hessian(x);
        }
        Ok(h)
    }

    /// `γ = h_max / h_min`.
    pub fn condition_number(&self) -> f64 {
        self.h_max / self.h_min
    }
}
