use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard assignment of nodes to groups.
///
/// Labels are canonical: groups are numbered 0..k in order of first
/// appearance, so two equal partitions compare equal regardless of the
/// labels they were built from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn from_labels<I>(labels: I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut remap = std::collections::HashMap::new();
        let labels: Vec<usize> = labels
            .into_iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        let k = remap.len();
        Partition { labels, k }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { labels: (0..n).collect(), k: n }
    }

    pub fn all_in_one(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    /// Build from explicit groups of node indices; every node in 0..n must
    /// appear exactly once.
    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::invalid(format!("group {g} is empty")));
            }
            for &i in members {
                if i >= n {
                    return Err(Error::invalid(format!("node {i} out of range 0..{n}")));
                }
                if labels[i] != usize::MAX {
                    return Err(Error::invalid(format!("node {i} assigned twice")));
                }
                labels[i] = g;
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::invalid(format!("node {i} not assigned")));
        }
        Ok(Self::from_labels(labels))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    /// n×k indicator matrix H with H[i, g] = 1 iff node i is in group g.
    pub fn indicator(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.labels.len(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            h[(i, l)] = 1.0;
        }
        h
    }

    /// H⁺ = (HᵀH)⁻¹Hᵀ, the k×n cell-averaging operator.
    pub fn indicator_pinv(&self) -> DMatrix<f64> {
        let sizes = self.sizes();
        let mut p = DMatrix::zeros(self.k, self.labels.len());
        for (i, &l) in self.labels.iter().enumerate() {
            p[(l, i)] = 1.0 / sizes[l] as f64;
        }
        p
    }

    /// Partition obtained by relabelling the groups of `self` through
    /// `coarse`, i.e. node i goes to coarse[label(i)].
    pub fn compose(&self, coarse: &Partition) -> Partition {
        Partition::from_labels(self.labels.iter().map(|&l| coarse.label(l)))
    }
}
