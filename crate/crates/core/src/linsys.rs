//! Linear time-invariant dynamics ẋ = 𝒜x + ℬu, y = 𝒞x (or the discrete
//! map x ← 𝒜x), together with the output weighting 𝒲 used to compare
//! impulse responses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    Continuous,
    Discrete,
}

/// Output-space weighting 𝒲 (n×n, symmetric PSD).
#[derive(Clone, Debug, PartialEq)]
pub enum Weighting {
    Identity,
    /// diag(d) with d ≥ 0, e.g. node degrees.
    Diagonal(DVector<f64>),
    /// I − α·ννᵀ with ‖ν‖ = 1 and α ∈ [0, 1].
    Projector { nu: DVector<f64>, alpha: f64 },
    Dense(DMatrix<f64>),
}

impl Weighting {
    /// The centering projector I − α·11ᵀ/n.
    pub fn centered(n: usize, alpha: f64) -> Result<Self> {
        Self::projector(DVector::from_element(n, 1.0 / (n as f64).sqrt()), alpha)
    }

    pub fn projector(nu: DVector<f64>, alpha: f64) -> Result<Self> {
        let norm = nu.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("projection vector has norm {norm}, expected 1")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
        }
        Ok(Weighting::Projector { nu, alpha })
    }

    pub fn degree(g: &Graph) -> Result<Self> {
        if g.is_signed() {
            return Err(Error::invalid("degree weighting requires nonnegative weights"));
        }
        Ok(Weighting::Diagonal(g.out_degrees()))
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Weighting::Identity => Ok(()),
            Weighting::Diagonal(d) => {
                if d.len() != n {
                    return Err(Error::dim("Weighting", format!("diagonal of length {} for n={n}", d.len())));
                }
                if d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::invalid("diagonal weighting must be finite and nonnegative"));
                }
                Ok(())
            }
            Weighting::Projector { nu, .. } => {
                if nu.len() != n {
                    return Err(Error::dim("Weighting", format!("ν of length {} for n={n}", nu.len())));
                }
                Ok(())
            }
            Weighting::Dense(w) => {
                if w.nrows() != n || w.ncols() != n {
                    return Err(Error::dim("Weighting", format!("{}x{} for n={n}", w.nrows(), w.ncols())));
                }
                let scale = linalg::max_abs(w).max(1.0);
                if linalg::max_abs(&(w - w.transpose())) > 1e-12 * scale {
                    return Err(Error::invalid("weighting matrix is not symmetric"));
                }
                if linalg::min_eigenvalue(w) < -1e-10 {
                    return Err(Error::invalid("weighting matrix is not positive semidefinite"));
                }
                Ok(())
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        match self {
            Weighting::Identity => DMatrix::identity(n, n),
            Weighting::Diagonal(d) => DMatrix::from_diagonal(d),
            Weighting::Projector { nu, alpha } => DMatrix::identity(n, n) - (nu * nu.transpose()) * *alpha,
            Weighting::Dense(w) => w.clone(),
        }
    }

    /// Yᵀ𝒲Y without materializing 𝒲 where possible.
    pub fn gram(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Weighting::Identity => y.transpose() * y,
            Weighting::Diagonal(d) => {
                let mut wy = y.clone();
                for (i, mut row) in wy.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                y.transpose() * wy
            }
            Weighting::Projector { nu, alpha } => {
                let proj = y.tr_mul(nu);
                y.transpose() * y - (&proj * proj.transpose()) * *alpha
            }
            Weighting::Dense(w) => y.transpose() * (w * y),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Weighting::Identity => "identity".into(),
            Weighting::Diagonal(_) => "diagonal".into(),
            Weighting::Projector { alpha, .. } => format!("projector(alpha={alpha})"),
            Weighting::Dense(_) => "dense".into(),
        }
    }
}

/// The quadruple (𝒜, ℬ, 𝒞, 𝒲) plus time mode.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    w: Weighting,
    mode: TimeMode,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, w: Weighting, mode: TimeMode) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m {
            return Err(Error::dim("LinearSystem", format!("𝒜 is {}x{}", m, a.ncols())));
        }
        if b.nrows() != m {
            return Err(Error::dim("LinearSystem", format!("ℬ has {} rows, 𝒜 is {m}x{m}", b.nrows())));
        }
        if c.ncols() != m {
            return Err(Error::dim("LinearSystem", format!("𝒞 has {} columns, 𝒜 is {m}x{m}", c.ncols())));
        }
        for (name, mat) in [("𝒜", &a), ("ℬ", &b), ("𝒞", &c)] {
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("{name} has non-finite entries")));
            }
        }
        w.validate(c.nrows())?;
        Ok(LinearSystem { a, b, c, w, mode })
    }

    /// 𝒜 with ℬ = 𝒞 = 𝒲 = I.
    pub fn from_operator(a: DMatrix<f64>, mode: TimeMode) -> Result<Self> {
        let m = a.nrows();
        Self::new(a, DMatrix::identity(m, m), DMatrix::identity(m, m), Weighting::Identity, mode)
    }

    /// Build a node-level system for one of the supported graph dynamics.
    pub fn from_graph(g: &Graph, dynamics: Dynamics, teleport: Option<f64>) -> Result<Self> {
        let a = dynamics.operator(g, teleport)?;
        let mode = if dynamics == Dynamics::Discrete {
            TimeMode::Discrete
        } else {
            TimeMode::Continuous
        };
        Self::from_operator(a, mode)
    }

    pub fn with_weighting(mut self, w: Weighting) -> Result<Self> {
        w.validate(self.c.nrows())?;
        self.w = w;
        Ok(self)
    }

    pub fn with_output(mut self, c: DMatrix<f64>, w: Weighting) -> Result<Self> {
        if c.ncols() != self.a.nrows() {
            return Err(Error::dim("LinearSystem", format!("𝒞 has {} columns, state dim {}", c.ncols(), self.a.nrows())));
        }
        w.validate(c.nrows())?;
        self.c = c;
        self.w = w;
        Ok(self)
    }

    pub fn with_input(mut self, b: DMatrix<f64>) -> Result<Self> {
        if b.nrows() != self.a.nrows() {
            return Err(Error::dim("LinearSystem", format!("ℬ has {} rows, state dim {}", b.nrows(), self.a.nrows())));
        }
        self.b = b;
        Ok(self)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn weighting(&self) -> &Weighting {
        &self.w
    }

    pub fn mode(&self) -> TimeMode {
        self.mode
    }

    /// State dimension m.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs p (size of Ψ).
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs n.
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn b_is_identity(&self) -> bool {
        let m = self.a.nrows();
        self.b.nrows() == m && self.b.ncols() == m && self.b == DMatrix::identity(m, m)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("time {t} must be finite and nonnegative")));
        }
        if self.mode == TimeMode::Discrete && t.fract() != 0.0 {
            return Err(Error::invalid(format!("discrete-time system needs an integer time, got {t}")));
        }
        Ok(())
    }

    /// exp(𝒜t) in continuous mode, 𝒜ᵗ in discrete mode.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check_time(t)?;
        match self.mode {
            TimeMode::Continuous => linalg::expm(&(&self.a * t)),
            TimeMode::Discrete => Ok(linalg::matrix_power(&self.a, t as u64)),
        }
    }

    /// Propagators for a whole grid. A time that is exactly twice an
    /// earlier grid point is obtained by squaring that point's propagator.
    pub fn propagators(&self, times: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            self.check_time(t)?;
            let half = (0..k).find(|&j| t > 0.0 && (times[j] * 2.0 - t).abs() <= 1e-12 * t);
            let p = match half {
                Some(j) => &out[j] * &out[j],
                None => self.propagator(t)?,
            };
            out.push(p);
        }
        Ok(out)
    }

    pub fn impulse_response(&self, t: f64) -> Result<ResponseSet> {
        let p = self.propagator(t)?;
        Ok(ResponseSet {
            t,
            y: self.response_from_propagator(&p),
        })
    }

    pub fn c_is_identity(&self) -> bool {
        let m = self.a.nrows();
        self.c.nrows() == m && self.c.ncols() == m && self.c == DMatrix::identity(m, m)
    }

    /// Y = 𝒞·P·ℬ, skipping identity factors.
    pub fn response_from_propagator(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let pb = if self.b_is_identity() { p.clone() } else { p * &self.b };
        if self.c_is_identity() {
            pb
        } else {
            &self.c * pb
        }
    }
}

/// Impulse responses at time t; column i is yᵢ(t).
#[derive(Clone, Debug)]
pub struct ResponseSet {
    pub t: f64,
    pub y: DMatrix<f64>,
}

/// Graph dynamics selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// 𝒜 = −L (combinatorial Laplacian)
    Diffusion,
    /// 𝒜 = −L_rw (random-walk Laplacian)
    Rw,
    /// 𝒜 = −L_s (signed Laplacian)
    Signed,
    /// 𝒜 = K_in⁻¹Aᵀ − I
    Influence,
    /// 𝒜 = −I + Aᵀ (rate model; A[i,j] is the synapse i→j)
    Rate,
    /// discrete 𝒜 = Mᵀ with M = K⁻¹A
    Discrete,
}

impl Dynamics {
    /// Generator matrix 𝒜 for this dynamics on `g`. With a teleport rate the
    /// diffusive variants use the teleportation Laplacian instead.
    pub fn operator(self, g: &Graph, teleport: Option<f64>) -> Result<DMatrix<f64>> {
        match (self, teleport) {
            (Dynamics::Diffusion | Dynamics::Rw, Some(tau)) => Ok(-graph::teleportation_laplacian(g, tau)?),
            (_, Some(_)) => Err(Error::invalid(format!("teleportation is only defined for diffusion/rw dynamics, not {self:?}"))),
            (Dynamics::Diffusion, None) => Ok(-graph::combinatorial_laplacian(g)?),
            (Dynamics::Rw, None) => Ok(-graph::random_walk_laplacian(g)?),
            (Dynamics::Signed, None) => Ok(-graph::signed_laplacian(g)?),
            (Dynamics::Influence, None) => graph::influence_operator(g),
            (Dynamics::Rate, None) => {
                let n = g.n();
                Ok(g.weights().transpose() - DMatrix::identity(n, n))
            }
            (Dynamics::Discrete, None) => Ok(graph::discrete_transition_matrix(g)?.transpose()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_edge_diffusion() -> LinearSystem {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        LinearSystem::from_operator(-l, TimeMode::Continuous).unwrap()
    }

    #[test]
    fn zero_generator_gives_identity() {
        let sys = LinearSystem::from_operator(DMatrix::zeros(3, 3), TimeMode::Continuous).unwrap();
        assert_eq!(sys.propagator(5.0).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn unit_edge_closed_form() {
        let sys = unit_edge_diffusion();
        for &t in &[0.0, 0.1, 1.0, 3.7] {
            let p = sys.propagator(t).unwrap();
            let e = (-2.0 * t).exp();
            let want = DMatrix::from_row_slice(2, 2, &[1.0 + e, 1.0 - e, 1.0 - e, 1.0 + e]) * 0.5;
            assert!(linalg::max_abs(&(p - want)) < 1e-14, "t={t}");
        }
    }

    #[test]
    fn discrete_swap_squared() {
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let sys = LinearSystem::from_operator(swap, TimeMode::Discrete).unwrap();
        assert_eq!(sys.propagator(2.0).unwrap(), DMatrix::identity(2, 2));
        assert!(sys.propagator(1.5).is_err());
        assert!(sys.propagator(-1.0).is_err());
    }

    #[test]
    fn impulse_response_examples() {
        let sys = LinearSystem::from_operator(DMatrix::from_element(3, 3, 0.3), TimeMode::Continuous).unwrap();
        assert_eq!(sys.impulse_response(0.0).unwrap().y, DMatrix::identity(3, 3));

        let centering = DMatrix::identity(2, 2) - DMatrix::from_element(2, 2, 0.5);
        let sys = unit_edge_diffusion().with_output(centering, Weighting::Identity).unwrap();
        let t = 0.8;
        let y = sys.impulse_response(t).unwrap().y;
        let e = (-2.0 * t).exp();
        assert!((y[(0, 0)] - 0.5 * e).abs() < 1e-14);
        assert!((y[(1, 0)] + 0.5 * e).abs() < 1e-14);

        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let sys1 = unit_edge_diffusion().with_input(e1.clone()).unwrap();
        let y1 = sys1.impulse_response(t).unwrap().y;
        assert_eq!(y1.ncols(), 1);
        assert!(linalg::max_abs(&(y1 - sys1.propagator(t).unwrap() * e1)) < 1e-15);
    }

    #[test]
    fn grid_reuses_doubling() {
        let sys = unit_edge_diffusion();
        let times = [0.25, 0.5, 0.7, 1.0, 1.4];
        let ps = sys.propagators(&times).unwrap();
        for (p, &t) in ps.iter().zip(&times) {
            assert!(linalg::max_abs(&(p - sys.propagator(t).unwrap())) < 1e-14);
        }
    }

    #[test]
    fn weighting_validation() {
        assert!(Weighting::centered(4, 1.0).is_ok());
        assert!(Weighting::centered(4, 1.5).is_err());
        assert!(Weighting::projector(DVector::from_vec(vec![1.0, 1.0]), 1.0).is_err());
        let sys = unit_edge_diffusion();
        let bad = Weighting::Dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(sys.clone().with_weighting(bad).is_err());
        let wrong = Weighting::Diagonal(DVector::from_vec(vec![1.0]));
        assert!(sys.with_weighting(wrong).is_err());
    }

    #[test]
    fn gram_matches_dense_weighting() {
        let y = DMatrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.7));
        let ws = [
            Weighting::Identity,
            Weighting::Diagonal(DVector::from_vec(vec![1.0, 2.0, 0.5, 3.0])),
            Weighting::centered(4, 0.6).unwrap(),
        ];
        for w in ws {
            let dense = Weighting::Dense(w.to_dense(4));
            assert!(linalg::max_abs(&(w.gram(&y) - dense.gram(&y))) < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = DMatrix::zeros(3, 3);
        let b = DMatrix::zeros(2, 3);
        assert!(LinearSystem::new(a, b, DMatrix::identity(3, 3), Weighting::Identity, TimeMode::Continuous).is_err());
    }
}
