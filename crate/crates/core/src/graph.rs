//! Weighted, possibly directed and signed graphs, edge-list ingestion, and
//! the linear operators (Laplacians, transition matrices) that drive the
//! dynamics elsewhere in the crate.
//!
//! Convention: `A[(i, j)]` is the weight of the edge i→j. Degree matrices
//! use out-degrees `K = diag(A·1)` unless stated otherwise.

use std::collections::HashMap;
use std::io::BufRead;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::Partition;

/// Residual tolerance for accepting an external equitable partition.
pub const EEP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Graph {
    node_ids: Vec<String>,
    weights: DMatrix<f64>,
    directed: bool,
    signed: bool,
}

impl Graph {
    /// Build a graph from a dense weight matrix.
    ///
    /// An undirected graph must have an exactly symmetric matrix.
    pub fn from_dense(node_ids: Vec<String>, weights: DMatrix<f64>, directed: bool) -> Result<Self> {
        let n = node_ids.len();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(Error::dim(
                "Graph::from_dense",
                format!("{} labels for a {}x{} matrix", n, weights.nrows(), weights.ncols()),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &node_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate node id {id:?}")));
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite edge weight"));
        }
        if !directed && weights != weights.transpose() {
            return Err(Error::invalid("undirected graph requires a symmetric weight matrix"));
        }
        let signed = weights.iter().any(|&w| w < 0.0);
        Ok(Graph {
            node_ids,
            weights,
            directed,
            signed,
        })
    }

    /// Convenience constructor with labels "0", "1", ...
    pub fn from_matrix(weights: DMatrix<f64>, directed: bool) -> Result<Self> {
        let ids = (0..weights.nrows()).map(|i| i.to_string()).collect();
        Self::from_dense(ids, weights, directed)
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn out_degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.row_iter().map(|r| r.sum()))
    }

    pub fn in_degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.column_iter().map(|c| c.sum()))
    }

    /// Absolute strengths Σ_k |A_ik|.
    pub fn abs_strengths(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.weights.row_iter().map(|r| r.iter().map(|w| w.abs()).sum()),
        )
    }

    /// Same nodes, A replaced by (A + Aᵀ)/2 and marked undirected.
    pub fn symmetrized(&self) -> Graph {
        let w = linalg::symmetrize(&self.weights);
        // (a+b)/2 and (b+a)/2 agree bit-for-bit, so `w` is exactly symmetric.
        Graph::from_dense(self.node_ids.clone(), w, false).expect("symmetrized matrix is valid")
    }

    pub fn is_connected(&self) -> bool {
        let labels = linalg::weak_components(&self.weights);
        labels.iter().all(|&l| l == 0)
    }

    fn require_unsigned(&self, op: &str) -> Result<()> {
        if self.signed {
            return Err(Error::invalid(format!(
                "{op} requires nonnegative weights; use signed_laplacian for signed graphs"
            )));
        }
        Ok(())
    }
}

/// Parse a tab-separated `src<TAB>dst<TAB>weight` edge list.
///
/// Lines starting with `#` and blank lines are skipped. Nodes are numbered
/// in order of first appearance; repeated (src, dst) pairs add their weights.
pub fn load_edge_list<R: BufRead>(source: R, directed: bool) -> Result<Graph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();

    let mut intern = |label: &str, ids: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = ids.len();
        index.insert(label.to_string(), i);
        ids.push(label.to_string());
        i
    };

    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let (src, dst) = (cols[0].trim(), cols[1].trim());
        if src.is_empty() || dst.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "empty node label".into(),
            });
        }
        let w: f64 = cols[2].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("cannot parse weight {:?}", cols[2]),
        })?;
        if !w.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("weight {w} is not finite"),
            });
        }
        let i = intern(src, &mut ids);
        let j = intern(dst, &mut ids);
        edges.push((i, j, w));
    }

    let n = ids.len();
    let mut a = DMatrix::zeros(n, n);
    for (i, j, w) in edges {
        a[(i, j)] += w;
        if !directed && i != j {
            a[(j, i)] += w;
        }
    }
    Graph::from_dense(ids, a, directed)
}

/// L = diag(A·1) − A.
pub fn combinatorial_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    g.require_unsigned("combinatorial_laplacian")?;
    let mut l = -g.weights.clone();
    let d = g.out_degrees();
    for i in 0..g.n() {
        l[(i, i)] += d[i];
    }
    Ok(l)
}

/// M = K⁻¹A with all-zero rows for nodes without out-edges.
pub fn discrete_transition_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    g.require_unsigned("discrete_transition_matrix")?;
    let d = g.out_degrees();
    let mut m = g.weights.clone();
    for i in 0..g.n() {
        let mut row = m.row_mut(i);
        if d[i] > 0.0 {
            row /= d[i];
        } else {
            row.fill(0.0);
        }
    }
    Ok(m)
}

/// L_rw = I − K⁻¹A. Nodes without out-edges get an all-zero row: they hold
/// their mass instead of leaking it.
pub fn random_walk_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    let m = discrete_transition_matrix(g)?;
    let d = g.out_degrees();
    let mut l = -m;
    for i in 0..g.n() {
        if d[i] > 0.0 {
            l[(i, i)] += 1.0;
        }
    }
    Ok(l)
}

/// L_s = D_s − A with [D_s]_ii = Σ_k |A_ik|; positive semidefinite.
pub fn signed_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    if g.directed {
        return Err(Error::invalid("signed_laplacian requires an undirected graph"));
    }
    let mut l = -g.weights.clone();
    let d = g.abs_strengths();
    for i in 0..g.n() {
        l[(i, i)] += d[i];
    }
    Ok(l)
}

/// Influence dynamics operator K_in⁻¹Aᵀ − I; rows of K_in⁻¹Aᵀ for nodes
/// with zero in-degree are zero.
pub fn influence_operator(g: &Graph) -> Result<DMatrix<f64>> {
    g.require_unsigned("influence_operator")?;
    let n = g.n();
    let k_in = g.in_degrees();
    let mut op = g.weights.transpose();
    for i in 0..n {
        let mut row = op.row_mut(i);
        if k_in[i] > 0.0 {
            row /= k_in[i];
        } else {
            row.fill(0.0);
        }
        op[(i, i)] -= 1.0;
    }
    Ok(op)
}

/// L̃ = I − [(1−τ)M' + τ·11ᵀ/n], where M' is the transition matrix with
/// sink rows replaced by the uniform distribution.
pub fn teleportation_laplacian(g: &Graph, tau: f64) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::invalid(format!("teleport rate {tau} outside [0, 1)")));
    }
    let n = g.n();
    let mut m = discrete_transition_matrix(g)?;
    let d = g.out_degrees();
    let uniform = 1.0 / n as f64;
    for i in 0..n {
        if d[i] <= 0.0 {
            m.row_mut(i).fill(uniform);
        }
    }
    let t = m * (1.0 - tau) + DMatrix::from_element(n, n, tau * uniform);
    Ok(DMatrix::identity(n, n) - t)
}

/// Coarse-grained graph over the cells of an external equitable partition.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    pub cells: Partition,
    /// L̂ = H⁺ L H.
    pub quotient_laplacian: DMatrix<f64>,
    pub residual: f64,
}

/// Accept `cells` iff L·H = H·L̂ with L̂ = H⁺LH, up to [`EEP_TOL`] in max norm.
pub fn check_eep(g: &Graph, cells: &Partition) -> Result<QuotientGraph> {
    if g.directed {
        return Err(Error::invalid("check_eep requires an undirected graph"));
    }
    if cells.len() != g.n() {
        return Err(Error::dim(
            "check_eep",
            format!("partition covers {} nodes, graph has {}", cells.len(), g.n()),
        ));
    }
    let l = combinatorial_laplacian(g)?;
    let h = cells.indicator();
    let lh = &l * &h;
    let lhat = cells.indicator_pinv() * &lh;
    let residual = linalg::max_abs(&(lh - &h * &lhat));
    if residual > EEP_TOL {
        return Err(Error::NotEquitable { residual });
    }
    Ok(QuotientGraph {
        cells: cells.clone(),
        quotient_laplacian: lhat,
        residual,
    })
}
