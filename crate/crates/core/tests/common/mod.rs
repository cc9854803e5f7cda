//! Independent reference computations used by the integration tests.
//! None of these call into the library's numerical kernels.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// exp(M) by halving until ‖M‖₁ ≤ 1/2, a 60-term Taylor sum, and squaring back.
pub fn taylor_expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = (0..n).map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let a = m / 2f64.powi(s);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=60 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Ψ(t) straight from its definition, with the Taylor exponential.
pub fn psi_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, w: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let e = taylor_expm(&(a * t));
    let y = c * e * b;
    y.transpose() * w * y
}

/// Composite Simpson rule on n (even) panels of a matrix-valued integrand.
pub fn simpson<F: Fn(f64) -> DMatrix<f64>>(f: F, t: f64, panels: usize) -> DMatrix<f64> {
    let h = t / panels as f64;
    let mut acc = f(0.0) + f(t);
    for k in 1..panels {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(k as f64 * h) * weight;
    }
    acc * (h / 3.0)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.gen_range(-scale..scale))
}

/// Symmetric PSD matrix XXᵀ of the given rank.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let x = random_matrix(r, n, rank, 1.0);
    &x * x.transpose()
}

/// Random matrix shifted so every eigenvalue has real part ≤ −margin
/// (Gershgorin on rows).
pub fn random_stable(r: &mut ChaCha8Rng, m: usize, margin: f64) -> DMatrix<f64> {
    let mut a = random_matrix(r, m, m, 1.0);
    let radius = (0..m)
        .map(|i| a[(i, i)] + (0..m).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(f64::MIN, f64::max);
    for i in 0..m {
        a[(i, i)] -= radius + margin;
    }
    a
}

/// Random undirected weighted tree: node k attaches to a uniformly chosen earlier node.
pub fn random_tree(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    for k in 1..n {
        let p = r.gen_range(0..k);
        let x = r.gen_range(0.5..2.0);
        w[(k, p)] = x;
        w[(p, k)] = x;
    }
    w
}

/// Random connected undirected weighted graph: a random tree plus extra edges.
pub fn random_connected(r: &mut ChaCha8Rng, n: usize, extra_p: f64) -> DMatrix<f64> {
    let mut w = random_tree(r, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] == 0.0 && r.gen_bool(extra_p) {
                let x = r.gen_range(0.5..2.0);
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
    }
    w
}

pub fn laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        l[(i, i)] += w.row(i).sum();
    }
    l
}

/// L† via (L + J/n)⁻¹ − J/n, valid for a connected graph.
pub fn laplacian_pinv(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    (l + &j).try_inverse().expect("connected graph") - j
}

/// Second-smallest Laplacian eigenvalue.
pub fn fiedler_value(l: &DMatrix<f64>) -> f64 {
    let mut ev: Vec<f64> = l.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

/// All set partitions of 0..n as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    // `used` is the number of labels taken so far; the next node may join
    // any of them or open label `used`.
    fn rec(n: usize, cur: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=used {
            cur.push(l);
            rec(n, cur, used.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Σ_{i,j: same label} M_ij.
pub fn block_sum(m: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                s += m[(i, j)];
            }
        }
    }
    s
}

pub fn uniform(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

/// Squared distances from a Gram matrix, without clamping.
pub fn gram_distances(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    DMatrix::from_fn(n, n, |i, j| g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)])
}
