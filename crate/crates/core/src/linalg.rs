//! Small dense helpers on plain slices. Stacked vectors are laid out node-major:
//! block `i` of a stacked vector with dimension `d` is `x[i*d..(i+1)*d]`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn block(x: &[f64], i: usize, d: usize) -> &[f64] {
    &x[i * d..(i + 1) * d]
}

pub fn block_mut(x: &mut [f64], i: usize, d: usize) -> &mut [f64] {
    &mut x[i * d..(i + 1) * d]
}

/// `1 ⊗ v`: `n` stacked copies of `v`.
pub fn replicate(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() * n);
    for _ in 0..n {
        out.extend_from_slice(v);
    }
    out
}

/// `(1 ⊗ I)^T x`: sum of the `d`-blocks.
pub fn block_sum(x: &[f64], d: usize) -> Vec<f64> {
    let mut s = vec![0.0; d];
    for chunk in x.chunks_exact(d) {
        for (si, ci) in s.iter_mut().zip(chunk) {
            *si += ci;
        }
    }
    s
}
