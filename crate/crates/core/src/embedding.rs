//! Spectral coordinates of a similarity matrix: Ψ = VΛVᵀ, φᵢ = Λ^{1/2}Vᵀeᵢ.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::linsys::LinearSystem;
use crate::similarity::{self, Centering, SimilarityMatrix, TimeSpec};

/// Relative gap below which consecutive eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    /// Descending, clamped at zero.
    pub eigenvalues: DVector<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub t_spec: TimeSpec,
    pub centering: Option<Centering>,
    /// degenerate[k] is true when μ_k shares a numerically degenerate
    /// cluster with a neighbour, so v_k alone is not identifiable.
    pub degenerate: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct EmbeddingCoords {
    /// Row i holds the first c coordinates of φᵢ.
    pub coords: DMatrix<f64>,
    pub c: usize,
    /// Σ_{k>c} μ_k / Σ_k μ_k, or 0 for a zero matrix.
    pub truncation_error: f64,
    /// ±1 applied to each retained eigenvector relative to the raw solver output.
    pub signs: Vec<f64>,
    pub t_spec: TimeSpec,
}

/// Flip v so that its largest-magnitude entry is positive (first one on ties).
fn canonical_sign(v: &mut [f64]) -> f64 {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).copied().unwrap_or(0.0) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        -1.0
    } else {
        1.0
    }
}

pub fn decompose(psi: &SimilarityMatrix) -> Result<SpectralDecomp> {
    let v = &psi.values;
    if !v.is_square() {
        return Err(Error::dim("decompose", format!("{}x{} is not square", v.nrows(), v.ncols())));
    }
    let scale = linalg::max_abs(v).max(f64::MIN_POSITIVE);
    if linalg::max_abs(&(v - v.transpose())) > 1e-12 * scale {
        return Err(Error::invalid("decompose requires a symmetric matrix"));
    }
    let (vals, mut vecs) = linalg::sym_eigen_desc(v);
    let n = vals.len();
    for k in 0..n {
        let mut col: Vec<f64> = vecs.column(k).iter().copied().collect();
        canonical_sign(&mut col);
        vecs.set_column(k, &DVector::from_vec(col));
    }
    let eigenvalues = vals.map(|x| x.max(0.0));
    let top = eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut degenerate = vec![false; n];
    for k in 1..n {
        if top > 0.0 && (eigenvalues[k - 1] - eigenvalues[k]).abs() < DEGENERACY_TOL * top {
            degenerate[k - 1] = true;
            degenerate[k] = true;
        }
    }
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors: vecs,
        t_spec: psi.t_spec,
        centering: psi.centering.clone(),
        degenerate,
    })
}

pub fn embed(decomp: &SpectralDecomp, c: usize) -> Result<EmbeddingCoords> {
    let n = decomp.eigenvalues.len();
    if c == 0 || c > n {
        return Err(Error::invalid(format!("embedding dimension {c} outside 1..={n}")));
    }
    let mu = &decomp.eigenvalues;
    let coords = DMatrix::from_fn(n, c, |i, k| mu[k].sqrt() * decomp.eigenvectors[(i, k)]);
    let total: f64 = mu.sum();
    let tail: f64 = mu.iter().skip(c).sum();
    Ok(EmbeddingCoords {
        coords,
        c,
        truncation_error: if total > 0.0 { tail / total } else { 0.0 },
        signs: vec![1.0; c],
        t_spec: decomp.t_spec,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedNode {
    pub node: usize,
    pub node_id: String,
    pub score: f64,
}

/// Nodes in descending order of coordinate `dim` (0-based); ties by node id.
pub fn rank_by_coordinate(emb: &EmbeddingCoords, dim: usize, node_ids: &[String]) -> Result<Vec<RankedNode>> {
    if dim >= emb.c {
        return Err(Error::invalid(format!("coordinate {dim} not among the {} retained", emb.c)));
    }
    if node_ids.len() != emb.coords.nrows() {
        return Err(Error::dim(
            "rank_by_coordinate",
            format!("{} ids for {} nodes", node_ids.len(), emb.coords.nrows()),
        ));
    }
    let mut out: Vec<RankedNode> = (0..node_ids.len())
        .map(|i| RankedNode {
            node: i,
            node_id: node_ids[i].clone(),
            score: emb.coords[(i, dim)],
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.node_id.cmp(&b.node_id)));
    Ok(out)
}

/// Embeddings of Ψ(t) over an increasing grid, with each coordinate's sign
/// chosen to agree with the previous time step.
pub fn embedding_trajectory(sys: &LinearSystem, times: &[f64], c: usize) -> Result<Vec<EmbeddingCoords>> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("trajectory times must be strictly increasing"));
    }
    let props = sys.propagators(times)?;
    let mut out: Vec<EmbeddingCoords> = Vec::with_capacity(times.len());
    for (&t, p) in times.iter().zip(&props) {
        let psi = similarity::similarity_from_propagator(sys, p, t, sys.weighting());
        let mut emb = embed(&decompose(&psi)?, c)?;
        if let Some(prev) = out.last() {
            for k in 0..c {
                let dot = prev.coords.column(k).dot(&emb.coords.column(k));
                if dot < 0.0 {
                    emb.coords.column_mut(k).neg_mut();
                    emb.signs[k] = -emb.signs[k];
                }
            }
        }
        out.push(emb);
    }
    Ok(out)
}

/// Ranks 1..n with ties given their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("spearman needs two samples of equal length ≥ 2"));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::numerical("spearman", "a sample is constant"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::{TimeMode, Weighting};

    fn sim(m: DMatrix<f64>) -> SimilarityMatrix {
        SimilarityMatrix::new(m, TimeSpec::Point { t: 0.0 }, &Weighting::Identity)
    }

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("node{i}")).collect()
    }

    #[test]
    fn identity_decomposes_canonically() {
        let d = decompose(&sim(DMatrix::identity(3, 3))).unwrap();
        assert!(d.eigenvalues.iter().all(|&m| (m - 1.0).abs() < 1e-15));
        assert!(d.degenerate.iter().all(|&x| x));
        let vtv = d.eigenvectors.tr_mul(&d.eigenvectors);
        assert!(linalg::max_abs(&(vtv - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn diagonal_spectrum() {
        let d = decompose(&sim(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])))).unwrap();
        assert_eq!(d.eigenvalues.as_slice(), &[4.0, 1.0]);
        assert_eq!(d.eigenvectors, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(d.degenerate, vec![false, false]);
    }

    #[test]
    fn two_node_diffusion() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let sys = LinearSystem::from_operator(-l, TimeMode::Continuous).unwrap();
        let t = 0.4;
        let psi = similarity::similarity_at(&sys, t).unwrap();
        let d = decompose(&psi).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - (-4.0 * t).exp()).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        assert!((d.eigenvectors[(0, 0)] - s).abs() < 1e-14 && (d.eigenvectors[(1, 0)] - s).abs() < 1e-14);
        assert!((d.eigenvectors[(0, 1)].abs() - s).abs() < 1e-14);
        assert!(d.eigenvectors[(0, 1)] * d.eigenvectors[(1, 1)] < 0.0);

        let e = embed(&d, 2).unwrap();
        let gap = (e.coords.row(0) - e.coords.row(1)).norm_squared();
        assert!((gap - 2.0 * (-4.0 * t).exp()).abs() < 1e-14);
    }

    #[test]
    fn full_rank_reconstructs_and_rank_one_truncates_exactly() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 0.7]);
        let e = embed(&decompose(&sim(m.clone())).unwrap(), 3).unwrap();
        assert!(linalg::max_abs(&(&e.coords * e.coords.transpose() - m)) < 1e-12);
        assert!(e.truncation_error.abs() < 1e-15);

        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let e = embed(&decompose(&sim(&v * v.transpose())).unwrap(), 1).unwrap();
        assert!(e.truncation_error < 1e-15);
        assert!(embed(&decompose(&sim(DMatrix::identity(2, 2))).unwrap(), 3).is_err());
        assert!(embed(&decompose(&sim(DMatrix::identity(2, 2))).unwrap(), 0).is_err());
    }

    #[test]
    fn non_symmetric_rejected() {
        let mut s = sim(DMatrix::identity(2, 2));
        s.values[(0, 1)] = 1.0;
        assert!(decompose(&s).is_err());
    }

    #[test]
    fn ranking_order_and_ties() {
        let emb = EmbeddingCoords {
            coords: DMatrix::from_column_slice(3, 1, &[0.9, 0.1, -0.3]),
            c: 1,
            truncation_error: 0.0,
            signs: vec![1.0],
            t_spec: TimeSpec::Point { t: 0.0 },
        };
        let r = rank_by_coordinate(&emb, 0, &ids(3)).unwrap();
        assert_eq!(r.iter().map(|x| x.node).collect::<Vec<_>>(), vec![0, 1, 2]);

        let flat = EmbeddingCoords {
            coords: DMatrix::from_element(3, 1, 0.5),
            ..emb.clone()
        };
        let names = vec!["b".to_string(), "c".to_string(), "a".to_string()];
        let r = rank_by_coordinate(&flat, 0, &names).unwrap();
        assert_eq!(r.iter().map(|x| x.node_id.as_str()).collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert!(rank_by_coordinate(&flat, 1, &names).is_err());
    }

    #[test]
    fn trajectory_at_zero_is_orthogonal_frame() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.3, 0.0, 0.2, -0.5, 0.1, 0.0, 0.4, -0.8]);
        let sys = LinearSystem::from_operator(a, TimeMode::Continuous).unwrap();
        let traj = embedding_trajectory(&sys, &[0.0, 0.5, 1.0], 3).unwrap();
        let c = &traj[0].coords;
        for i in 0..3 {
            for j in 0..3 {
                let d = (c.row(i) - c.row(j)).norm_squared();
                assert!((d - if i == j { 0.0 } else { 2.0 }).abs() < 1e-12);
            }
        }
        assert!(embedding_trajectory(&sys, &[1.0, 0.5], 2).is_err());
    }

    #[test]
    fn trajectory_signs_are_continuous() {
        let l = DMatrix::from_row_slice(
            4,
            4,
            &[2.0, -1.0, -1.0, 0.0, -1.0, 2.0, 0.0, -1.0, -1.0, 0.0, 1.5, -0.5, 0.0, -1.0, -0.5, 1.5],
        );
        let sys = LinearSystem::from_operator(-l, TimeMode::Continuous).unwrap();
        let times: Vec<f64> = (1..20).map(|k| k as f64 * 0.1).collect();
        let traj = embedding_trajectory(&sys, &times, 3).unwrap();
        for w in traj.windows(2) {
            for k in 0..3 {
                assert!(w[0].coords.column(k).dot(&w[1].coords.column(k)) >= 0.0);
            }
        }
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
