//! Synthetic problem instances and the dataset file format.
//!
//! Dataset CSV layout: a header row `label,a1,…,a{d-1}` followed by one row
//! per node holding the ±1 label and the feature vector (the intercept is
//! implicit and not stored).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::objective::{LogisticCost, NodeCost, ObjectiveStack, QuadraticCost};

/// Standard deviation of the label noise.
pub const LABEL_NOISE_SD: f64 = 1e-3;

/// One labelled sample per node, plus the vector that generated the labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    /// `(x*₁, x*₀)`: slope coefficients followed by the intercept.
    pub true_vector: Vec<f64>,
}

impl LogisticDataset {
    /// Draw `n` samples of dimension `d − 1`, all entries iid standard normal,
    /// labelled `sign(x*₁ᵀa + x*₀ + ε)` with `ε ~ N(0, 0.001²)`.
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("logistic data needs d >= 2, got {d}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("logistic data needs at least one node".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, LABEL_NOISE_SD).expect("positive standard deviation");
        let true_vector: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut features = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let a: Vec<f64> = (0..d - 1).map(|_| StandardNormal.sample(&mut rng)).collect();
            let eps = noise.sample(&mut rng);
            labels.push(label_for(&true_vector, &a, eps));
            features.push(a);
        }
        Ok(LogisticDataset { features, labels, true_vector })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-node regularized logistic costs with ridge weight `P/N`.
    pub fn to_stack(&self, regularization: f64) -> Result<ObjectiveStack> {
        let n = self.len();
        let costs = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(a, &b)| LogisticCost::new(a.clone(), b, regularization, n).map(NodeCost::Logistic))
            .collect::<Result<Vec<_>>>()?;
        ObjectiveStack::new(costs)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let width = self.features.first().map_or(0, Vec::len);
        let mut header = vec!["label".to_string()];
        header.extend((1..=width).map(|j| format!("a{j}")));
        w.write_record(&header)?;
        for (a, b) in self.features.iter().zip(&self.labels) {
            let mut row = vec![format!("{b}")];
            row.extend(a.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a dataset file; the generating vector is unknown and left empty.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let width = r.headers()?.len();
        if width < 2 {
            return Err(Error::Config("dataset needs a label column and at least one feature".into()));
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad dataset entry `{s}`: {e}")))
            };
            labels.push(parse(&rec[0])?);
            features.push(rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?);
        }
        Ok(LogisticDataset {
            features,
            labels,
            true_vector: Vec::new(),
        })
    }
}

/// `sign(x*₁ᵀa + x*₀ + ε)` with ties sent to `+1`.
pub fn label_for(true_vector: &[f64], feature: &[f64], noise: f64) -> f64 {
    let d = true_vector.len();
    let margin: f64 = true_vector[..d - 1]
        .iter()
        .zip(feature)
        .map(|(x, a)| x * a)
        .sum::<f64>()
        + true_vector[d - 1]
        + noise;
    if margin >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Logistic instance with one sample per node.
pub fn generate_logistic_data(n: usize, d: usize, regularization: f64, seed: u64) -> Result<ObjectiveStack> {
    LogisticDataset::generate(n, d, seed)?.to_stack(regularization)
}

/// Random strongly convex quadratics `½xᵀA_ix + b_iᵀx` with
/// `A_i = B_iᵀB_i/d + I/2` (`B_i` standard normal) and `b_i` standard normal.
pub fn generate_quadratic_data(n: usize, d: usize, seed: u64) -> Result<ObjectiveStack> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("quadratic data needs n, d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let costs = (0..n)
        .map(|_| {
            let b_mat = DMatrix::from_fn(d, d, |_, _| draw());
            let a = b_mat.transpose() * &b_mat / d as f64 + DMatrix::identity(d, d) * 0.5;
            let a = (&a + a.transpose()) * 0.5;
            let b = DVector::from_fn(d, |_, _| draw());
            QuadraticCost::new(a, b, 0.0).map(NodeCost::Quadratic)
        })
        .collect::<Result<Vec<_>>>()?;
    ObjectiveStack::new(costs)
}
