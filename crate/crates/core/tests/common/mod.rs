//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's linear algebra, so agreement is a genuine cross-check.

#![allow(dead_code)]

use dal_core::harness::generate_quadratic_data;
use dal_core::network::{build_chain_graph, build_geometric_graph, NetworkModel};
use dal_core::objective::{NodeCost, ObjectiveStack};

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(m: &nalgebra::DMatrix<f64>) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Dense = a.iter().zip(b).map(|(r, &bi)| {
        let mut r = r.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()).unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn mat_vec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// `(M ⊗ I_d) x` for a stacked node-major vector.
pub fn kron_apply(m: &Dense, x: &[f64], d: usize) -> Vec<f64> {
    let n = m.len();
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        for j in 0..n {
            for c in 0..d {
                out[i * d + c] += m[i][j] * x[j * d + c];
            }
        }
    }
    out
}

/// `vᵀ(𝓛⁺ ⊗ I)v` via `𝓛⁺ = (𝓛 + J)⁻¹ − J` with `J = 11ᵀ/N`.
pub fn laplacian_pinv_form(l: &Dense, v: &[f64], d: usize) -> f64 {
    let n = l.len();
    let shifted: Dense = (0..n).map(|i| (0..n).map(|j| l[i][j] + 1.0 / n as f64).collect()).collect();
    let mut total = 0.0;
    for c in 0..d {
        let vc: Vec<f64> = (0..n).map(|i| v[i * d + c]).collect();
        let y = gauss_solve(&shifted, &vc);
        let mean: f64 = vc.iter().sum::<f64>() / n as f64;
        total += vc.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - n as f64 * mean * mean;
    }
    total
}

pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimizer of `Σ_i (½xᵀA_ix + b_iᵀx)` for an all-quadratic stack.
pub fn quadratic_optimum(stack: &ObjectiveStack) -> Vec<f64> {
    let d = stack.dim();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for c in stack.costs() {
        let NodeCost::Quadratic(q) = c else { panic!("quadratic stack expected") };
        for i in 0..d {
            for j in 0..d {
                a[i][j] += q.a()[(i, j)];
            }
            b[i] -= q.b()[i];
        }
    }
    gauss_solve(&a, &b)
}

/// Five-node instance used for the inner-loop contraction checks.
pub fn five_node_quadratic() -> (ObjectiveStack, NetworkModel) {
    let g = build_geometric_graph(5, 0.6, 3).unwrap();
    let net = NetworkModel::with_scaled_metropolis(g, 0.55, 0.45).unwrap();
    (generate_quadratic_data(5, 3, 21).unwrap(), net)
}

pub fn chain_quadratic(n: usize, d: usize, seed: u64) -> (ObjectiveStack, NetworkModel) {
    let net = NetworkModel::with_scaled_metropolis(build_chain_graph(n).unwrap(), 0.55, 0.45).unwrap();
    (generate_quadratic_data(n, d, seed).unwrap(), net)
}
