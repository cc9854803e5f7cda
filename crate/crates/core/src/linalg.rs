//! Dense linear-algebra kernels shared by the dynamics code.
//!
//! The matrix exponential follows the scaling-and-squaring scheme with
//! diagonal Padé approximants of degree 3, 5, 7, 9 or 13, choosing the
//! lowest degree whose backward-error bound covers the scaled 1-norm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Padé coefficients b_0..b_m for m = 3, 5, 7, 9.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norms for which degree m reaches unit roundoff backward error.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// exp(a) for a square matrix.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dim("expm", format!("{}x{} is not square", n, a.ncols())));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("expm", "non-finite entry in exponent"));
    }
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }

    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-s);
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("expm", "overflow while squaring"));
    }
    Ok(r)
}

fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    // Even powers A^0, A^2, A^4, ...
    let mut powers = vec![id.clone(), a2.clone()];
    let m = b.len() - 1;
    while 2 * (powers.len() - 1) < m - 1 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        let odd = 2 * k + 1;
        let even = 2 * k;
        if odd <= m {
            u_inner += p * b[odd];
        }
        if even <= m {
            v += p * b[even];
        }
    }
    let u = a * u_inner;
    solve_pade(u, v)
}

fn pade13(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let b = &PADE13;
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_hi = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_inner = &a6 * u_hi + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = a * u_inner;

    let v_hi = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_hi + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    solve_pade(u, v)
}

fn solve_pade(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::numerical("expm", "singular Padé denominator"))
}

/// a^k by binary exponentiation.
pub fn matrix_power(a: &DMatrix<f64>, mut k: u64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// (a + aᵀ)/2
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the solver order inside exactly-equal clusters.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Moore–Penrose pseudoinverse of a symmetric matrix; eigenvalues below
/// `rel_tol · λ_max` in magnitude are treated as zero.
pub fn pinv_symmetric(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let (vals, vecs) = sym_eigen_desc(a);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = rel_tol * scale;
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = vals[k];
        if lam.abs() > cut {
            let v = vecs.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Component label of each node in the undirected support of `a`.
pub fn weak_components(a: &DMatrix<f64>) -> Vec<usize> {
    let n = a.nrows();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if label[v] == usize::MAX && (a[(u, v)] != 0.0 || a[(v, u)] != 0.0) {
                    label[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// True when every node reaches every other along nonzero entries of `a`
/// read as directed edges i→j.
pub fn strongly_connected(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    if n == 0 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if forward { a[(u, v)] } else { a[(v, u)] };
                if !seen[v] && w != 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}
