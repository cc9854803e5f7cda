use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::SimilarityMatrix;

/// Quality of the form trace Hᵀ(F − γ₁·α·abᵀ)H.
#[derive(Clone, Debug)]
pub struct QualityConfig {
    pub f: DMatrix<f64>,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub alpha: f64,
    /// Weights of the low-rank corrections. Only the rank-one scheme
    /// (γ₁ given, γ_k = 0 for k > 1) is supported; `None` means γ₁ = 1.
    pub gamma: Option<Vec<f64>>,
}

impl QualityConfig {
    /// F = Ψ with no null term.
    pub fn from_matrix(f: DMatrix<f64>) -> Self {
        let n = f.nrows();
        QualityConfig {
            f,
            a: DVector::zeros(n),
            b: DVector::zeros(n),
            alpha: 0.0,
            gamma: None,
        }
    }

    pub fn from_similarity(psi: &SimilarityMatrix) -> Self {
        Self::from_matrix(psi.values.clone())
    }

    /// F = YᵀY and a = b = Yᵀν, so the quality equals trace HᵀΨ⊥H with
    /// Ψ⊥ = Yᵀ(I − α·ννᵀ)Y.
    pub fn from_response(y: &DMatrix<f64>, nu: &DVector<f64>, alpha: f64) -> Result<Self> {
        if nu.len() != y.nrows() {
            return Err(Error::dim("QualityConfig", format!("ν has length {}, Y has {} rows", nu.len(), y.nrows())));
        }
        let a = y.tr_mul(nu);
        Ok(QualityConfig {
            f: y.tr_mul(y),
            b: a.clone(),
            a,
            alpha,
            gamma: None,
        })
    }

    /// Modularity: F = A/2m, a = b = d/2m.
    pub fn newman_girvan(adj: &DMatrix<f64>) -> Result<Self> {
        let two_m: f64 = adj.sum();
        if !(two_m > 0.0) {
            return Err(Error::invalid("modularity needs positive total weight"));
        }
        let d = DVector::from_iterator(adj.nrows(), adj.row_iter().map(|r| r.sum())) / two_m;
        Ok(QualityConfig {
            f: adj / two_m,
            a: d.clone(),
            b: d,
            alpha: 1.0,
            gamma: None,
        })
    }

    pub fn n(&self) -> usize {
        self.f.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if !self.f.is_square() || self.a.len() != n || self.b.len() != n {
            return Err(Error::dim(
                "QualityConfig",
                format!("F {}x{}, a {}, b {}", self.f.nrows(), self.f.ncols(), self.a.len(), self.b.len()),
            ));
        }
        if self.f.iter().chain(self.a.iter()).chain(self.b.iter()).any(|x| !x.is_finite()) || !self.alpha.is_finite() {
            return Err(Error::invalid("quality configuration has non-finite entries"));
        }
        if let Some(g) = &self.gamma {
            if g.is_empty() || g[1..].iter().any(|&x| x != 0.0) {
                return Err(Error::invalid("only the rank-one correction (γ_k = 0 for k > 1) is supported"));
            }
        }
        Ok(())
    }

    /// Multiplier of abᵀ.
    pub fn null_weight(&self) -> f64 {
        self.alpha * self.gamma.as_ref().map_or(1.0, |g| g[0])
    }

    pub fn score(&self, p: &Partition) -> f64 {
        let k = p.k();
        let labels = p.labels();
        let mut within = 0.0;
        for j in 0..self.n() {
            for i in 0..self.n() {
                if labels[i] == labels[j] {
                    within += self.f[(i, j)];
                }
            }
        }
        let mut sa = vec![0.0; k];
        let mut sb = vec![0.0; k];
        for (i, &l) in labels.iter().enumerate() {
            sa[l] += self.a[i];
            sb[l] += self.b[i];
        }
        let null: f64 = sa.iter().zip(&sb).map(|(x, y)| x * y).sum();
        within - self.null_weight() * null
    }

    /// Exact contraction (F, a, b) → (HᵀFH, Hᵀa, Hᵀb).
    pub fn aggregate(&self, p: &Partition) -> QualityConfig {
        let k = p.k();
        let labels = p.labels();
        let mut f = DMatrix::zeros(k, k);
        for j in 0..self.n() {
            for i in 0..self.n() {
                f[(labels[i], labels[j])] += self.f[(i, j)];
            }
        }
        let mut a = DVector::zeros(k);
        let mut b = DVector::zeros(k);
        for (i, &l) in labels.iter().enumerate() {
            a[l] += self.a[i];
            b[l] += self.b[i];
        }
        QualityConfig {
            f,
            a,
            b,
            alpha: self.alpha,
            gamma: self.gamma.clone(),
        }
    }
}

/// r(H) = trace HᵀΨ⊥H.
pub fn quality_score(psi_perp: &SimilarityMatrix, p: &Partition) -> Result<f64> {
    if psi_perp.n() != p.len() {
        return Err(Error::dim("quality_score", format!("{} nodes vs partition of {}", psi_perp.n(), p.len())));
    }
    Ok(QualityConfig::from_similarity(psi_perp).score(p))
}
