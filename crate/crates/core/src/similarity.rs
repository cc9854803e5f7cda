//! Dynamical similarity Ψ(t) = ℬᵀexp(𝒜t)ᵀ𝒞ᵀ𝒲𝒞exp(𝒜t)ℬ, its integrated
//! form over [0, t], the dual squared-distance matrices, observability
//! Gramians, diffusion autocovariances and resistance distances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::linalg;
use crate::linsys::{LinearSystem, TimeMode, Weighting};
use crate::partition::Partition;

/// Tolerance below which negative squared distances are treated as roundoff.
pub const NEG_CLAMP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeSpec {
    /// Ψ(t)
    Point { t: f64 },
    /// Ψ_[0,t]
    Interval { t: f64 },
}

impl TimeSpec {
    pub fn t(&self) -> f64 {
        match *self {
            TimeSpec::Point { t } | TimeSpec::Interval { t } => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub alpha: f64,
    pub nu: Vec<f64>,
}

/// Symmetric PSD similarity between the p inputs of a system.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix {
    pub values: DMatrix<f64>,
    pub t_spec: TimeSpec,
    pub centering: Option<Centering>,
    pub weighting: String,
}

impl SimilarityMatrix {
    /// Wrap a raw matrix, symmetrizing it.
    pub fn new(values: DMatrix<f64>, t_spec: TimeSpec, weighting: &Weighting) -> Self {
        let centering = match weighting {
            Weighting::Projector { nu, alpha } => Some(Centering {
                alpha: *alpha,
                nu: nu.iter().copied().collect(),
            }),
            _ => None,
        };
        SimilarityMatrix {
            values: linalg::symmetrize(&values),
            t_spec,
            centering,
            weighting: weighting.describe(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// min eigenvalue / max(|λ_max|, tiny); ≥ −1e−10 for a valid Ψ.
    pub fn min_eigen_ratio(&self) -> f64 {
        let (vals, _) = linalg::sym_eigen_desc(&self.values);
        let n = vals.len();
        if n == 0 {
            return 0.0;
        }
        let top = vals[0].abs().max(f64::MIN_POSITIVE);
        vals[n - 1] / top
    }
}

/// Squared distances D²_ij = ψ_ii + ψ_jj − 2ψ_ij and the diagonal z they came from.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    pub values: DMatrix<f64>,
    pub z: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct Gramian {
    pub values: DMatrix<f64>,
    pub horizon: f64,
}

/// Ψ(t).
pub fn similarity_at(sys: &LinearSystem, t: f64) -> Result<SimilarityMatrix> {
    let y = sys.impulse_response(t)?.y;
    Ok(SimilarityMatrix::new(sys.weighting().gram(&y), TimeSpec::Point { t }, sys.weighting()))
}

/// Ψ⊥(t) = Yᵀ(I − α·ννᵀ)Y, replacing the system's own 𝒲.
pub fn centered_similarity_at(sys: &LinearSystem, t: f64, nu: &DVector<f64>, alpha: f64) -> Result<SimilarityMatrix> {
    if nu.len() != sys.output_dim() {
        return Err(Error::dim(
            "centered_similarity_at",
            format!("ν has length {}, system has {} outputs", nu.len(), sys.output_dim()),
        ));
    }
    let w = Weighting::projector(nu.clone(), alpha)?;
    let y = sys.impulse_response(t)?.y;
    Ok(SimilarityMatrix::new(w.gram(&y), TimeSpec::Point { t }, &w))
}

/// Ψ for a precomputed propagator, using the system's 𝒞, ℬ and the given weighting.
pub fn similarity_from_propagator(sys: &LinearSystem, p: &DMatrix<f64>, t: f64, w: &Weighting) -> SimilarityMatrix {
    let y = sys.response_from_propagator(p);
    SimilarityMatrix::new(w.gram(&y), TimeSpec::Point { t }, w)
}

/// D² from any similarity (point or integrated).
pub fn distance_squared(psi: &SimilarityMatrix) -> Result<DistanceMatrix> {
    let v = &psi.values;
    let n = v.nrows();
    let z = v.diagonal();
    let scale = z.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = NEG_CLAMP_TOL * scale;
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let x = z[i] + z[j] - 2.0 * v[(i, j)];
            if x < -tol {
                return Err(Error::numerical(
                    "distance_squared",
                    format!("D²[{i},{j}] = {x:.3e} < 0: similarity is not positive semidefinite"),
                ));
            }
            d[(i, j)] = x.max(0.0);
        }
    }
    // Enforce exact symmetry after clamping.
    let d = linalg::symmetrize(&d);
    Ok(DistanceMatrix { values: d, z })
}

/// D²_[0,t] = 1zᵀ + z1ᵀ − 2Ψ_[0,t].
pub fn integrated_distance(psi_int: &SimilarityMatrix) -> Result<DistanceMatrix> {
    distance_squared(psi_int)
}

/// ∫₀ᵗ exp(𝒜ᵀs) Q exp(𝒜s) ds.
///
/// A block exponential of [[−𝒜ᵀ, Q], [0, 𝒜]] gives the integral over a
/// short horizon t/2^s; the horizon is then doubled s times using
/// G(2τ) = G(τ) + exp(𝒜τ)ᵀ G(τ) exp(𝒜τ), which never exponentiates the
/// anti-stable block −𝒜ᵀ over a long time.
pub fn gramian_integral(a: &DMatrix<f64>, q: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    if q.nrows() != m || q.ncols() != m {
        return Err(Error::dim("gramian_integral", format!("Q is {}x{}, 𝒜 is {m}x{m}", q.nrows(), q.ncols())));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("integration horizon {t} must be positive and finite")));
    }
    let norm = linalg::norm1(a) * t;
    let s = if norm > 1.0 { norm.log2().ceil() as i32 } else { 0 };
    let t0 = t * 2f64.powi(-s);

    let mut block = DMatrix::zeros(2 * m, 2 * m);
    block.view_mut((0, 0), (m, m)).copy_from(&(-a.transpose() * t0));
    block.view_mut((0, m), (m, m)).copy_from(&(q * t0));
    block.view_mut((m, m), (m, m)).copy_from(&(a * t0));
    let f = linalg::expm(&block)?;
    let f12 = f.view((0, m), (m, m)).clone_owned();
    let mut e = f.view((m, m), (m, m)).clone_owned();
    let mut g = linalg::symmetrize(&e.tr_mul(&f12));

    for _ in 0..s {
        g = linalg::symmetrize(&(&g + e.tr_mul(&(&g * &e))));
        e = &e * &e;
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("gramian_integral", "integral overflowed"));
    }
    Ok(g)
}

/// Ψ_[0,t] for a continuous-time system.
pub fn integrated_similarity(sys: &LinearSystem, t: f64) -> Result<SimilarityMatrix> {
    if sys.mode() != TimeMode::Continuous {
        return Err(Error::invalid(
            "integrated_similarity needs a continuous-time system; use summed_similarity for discrete time",
        ));
    }
    let n = sys.output_dim();
    let w = sys.weighting().to_dense(n);
    let q = sys.c().tr_mul(&(w * sys.c()));
    let g = gramian_integral(sys.a(), &q, t)?;
    let psi = sys.b().tr_mul(&(g * sys.b()));
    Ok(SimilarityMatrix::new(psi, TimeSpec::Interval { t }, sys.weighting()))
}

/// Discrete-time analogue of Ψ_[0,t]: Σ_{s=0}^{t} Ψ(s).
pub fn summed_similarity(sys: &LinearSystem, t: u64) -> Result<SimilarityMatrix> {
    if sys.mode() != TimeMode::Discrete {
        return Err(Error::invalid("summed_similarity needs a discrete-time system"));
    }
    let m = sys.state_dim();
    let mut p = DMatrix::<f64>::identity(m, m);
    let mut acc = DMatrix::zeros(sys.input_dim(), sys.input_dim());
    for s in 0..=t {
        if s > 0 {
            p = sys.a() * p;
        }
        acc += sys.weighting().gram(&sys.response_from_propagator(&p));
    }
    Ok(SimilarityMatrix::new(acc, TimeSpec::Interval { t: t as f64 }, sys.weighting()))
}

/// G_O(t) = ∫₀ᵗ exp(𝒜ᵀs)𝒞ᵀ𝒞 exp(𝒜s) ds.
pub fn observability_gramian(sys: &LinearSystem, t: f64) -> Result<Gramian> {
    if sys.mode() != TimeMode::Continuous {
        return Err(Error::invalid("observability_gramian needs a continuous-time system"));
    }
    let q = sys.c().tr_mul(sys.c());
    Ok(Gramian {
        values: gramian_integral(sys.a(), &q, t)?,
        horizon: t,
    })
}

/// Max-norm residual of the Lyapunov equation dΨ/dt = 𝒜ᵀΨ + Ψ𝒜, with the
/// derivative taken by central differences of step h.
pub fn lyapunov_residual(sys: &LinearSystem, t: f64, h: f64) -> Result<f64> {
    if sys.mode() != TimeMode::Continuous {
        return Err(Error::invalid("lyapunov_residual needs a continuous-time system"));
    }
    if !sys.b_is_identity() {
        return Err(Error::invalid("lyapunov_residual requires ℬ = I"));
    }
    if !(h > 0.0) || t < h {
        return Err(Error::invalid(format!("need 0 < h ≤ t, got h={h}, t={t}")));
    }
    let plus = similarity_at(sys, t + h)?.values;
    let minus = similarity_at(sys, t - h)?.values;
    let mid = similarity_at(sys, t)?.values;
    let deriv = (plus - minus) / (2.0 * h);
    let rhs = sys.a().tr_mul(&mid) + &mid * sys.a();
    Ok(linalg::max_abs(&(deriv - rhs)))
}

/// Stationary statistics of a diffusion ṗ = −pL and its transition matrix at t.
#[derive(Clone, Debug)]
pub struct DiffusionStats {
    /// Stationary row vector π (stored as a column).
    pub pi: DVector<f64>,
    /// Π = diag(π)
    pub pi_diag: DMatrix<f64>,
    /// Σ₀ = Π − πᵀπ
    pub sigma0: DMatrix<f64>,
    /// P(t) = exp(−Lt)
    pub p_t: DMatrix<f64>,
}

impl DiffusionStats {
    /// Σ(t) = Σ₀·P(t).
    pub fn autocovariance(&self) -> DMatrix<f64> {
        &self.sigma0 * &self.p_t
    }
}

/// The diffusion Laplacian used for autocovariances, and its stationary
/// distribution.
///
/// Undirected graphs use the combinatorial Laplacian (π uniform, requires
/// connectivity). Directed graphs without teleportation use the random-walk
/// Laplacian and need strong connectivity for π to be unique. With a
/// teleport rate the teleportation Laplacian is used.
pub fn diffusion_generator(g: &Graph, teleport: Option<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = g.n();
    match teleport {
        Some(tau) => {
            let l = graph::teleportation_laplacian(g, tau)?;
            let pi = stationary_distribution(&l)?;
            Ok((l, pi))
        }
        None if !g.is_directed() => {
            let l = graph::combinatorial_laplacian(g)?;
            if !g.is_connected() {
                return Err(Error::invalid("autocovariance needs a connected graph for a unique stationary distribution"));
            }
            Ok((l, DVector::from_element(n, 1.0 / n as f64)))
        }
        None => {
            let l = graph::random_walk_laplacian(g)?;
            if !linalg::strongly_connected(g.weights()) {
                return Err(Error::invalid(
                    "directed graph is not strongly connected, so there is no unique stationary distribution; \
                     add teleportation or use similarity_at directly (no teleportation needed)",
                ));
            }
            let pi = stationary_distribution(&l)?;
            Ok((l, pi))
        }
    }
}

/// Solve πL = 0, π·1 = 1 for a generator with zero row sums.
pub fn stationary_distribution(l: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = l.nrows();
    let mut sys = l.transpose();
    sys.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("stationary_distribution", "stationary distribution is not unique"))?;
    if pi.iter().any(|&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::numerical("stationary_distribution", "solution has negative mass"));
    }
    Ok(pi.map(|x| x.max(0.0)))
}

pub fn diffusion_stats(g: &Graph, t: f64, teleport: Option<f64>) -> Result<DiffusionStats> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("time {t} must be nonnegative")));
    }
    let (l, pi) = diffusion_generator(g, teleport)?;
    let pi_diag = DMatrix::from_diagonal(&pi);
    let sigma0 = &pi_diag - &pi * pi.transpose();
    let p_t = linalg::expm(&(-l * t))?;
    Ok(DiffusionStats { pi, pi_diag, sigma0, p_t })
}

/// Σ(t) = (Π − πᵀπ)·exp(−Lt).
pub fn autocovariance(g: &Graph, t: f64, teleport: Option<f64>) -> Result<DMatrix<f64>> {
    Ok(diffusion_stats(g, t, teleport)?.autocovariance())
}

/// Diffusion system 𝒜 = −L weighted by 𝒲 = Π − πᵀπ, whose similarity Ψ_Π(t)
/// equals Σ(2t) under detailed balance.
pub fn stationary_weighted_system(g: &Graph, teleport: Option<f64>) -> Result<LinearSystem> {
    let (l, pi) = diffusion_generator(g, teleport)?;
    let w = DMatrix::from_diagonal(&pi) - &pi * pi.transpose();
    LinearSystem::from_operator(-l, TimeMode::Continuous)?.with_weighting(Weighting::Dense(w))
}

/// κ_ij = (e_i − e_j)ᵀ L† (e_i − e_j).
pub fn resistance_distance(g: &Graph) -> Result<DMatrix<f64>> {
    if g.is_directed() {
        return Err(Error::invalid("resistance_distance requires an undirected graph"));
    }
    if !g.is_connected() {
        return Err(Error::invalid("graph is disconnected: resistance between components is infinite"));
    }
    let l = graph::combinatorial_laplacian(g)?;
    let lp = linalg::pinv_symmetric(&l, 1e-12);
    let n = g.n();
    Ok(DMatrix::from_fn(n, n, |i, j| lp[(i, i)] + lp[(j, j)] - 2.0 * lp[(i, j)]))
}

/// Outcome of checking that an external equitable partition makes Ψ block-constant.
#[derive(Clone, Debug, Serialize)]
pub struct EepReport {
    pub times: Vec<f64>,
    /// max over same-cell pairs of D²_ij(t) with 𝒞 = H⁺.
    pub within_cell_max: Vec<f64>,
    /// max |Ψ_full(t) − (exp(−L̂t)H⁺)ᵀ(exp(−L̂t)H⁺)|.
    pub quotient_mismatch: Vec<f64>,
}

impl EepReport {
    pub fn worst(&self) -> f64 {
        self.within_cell_max
            .iter()
            .chain(&self.quotient_mismatch)
            .fold(0.0, |m, &x| m.max(x))
    }
}

pub const EEP_CHECK_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

pub fn eep_block_check(g: &Graph, cells: &Partition, times: &[f64]) -> Result<EepReport> {
    let quotient = graph::check_eep(g, cells)?;
    let l = graph::combinatorial_laplacian(g)?;
    let hp = cells.indicator_pinv();
    let k = cells.k();
    let sys = LinearSystem::from_operator(-l, TimeMode::Continuous)?.with_output(hp.clone(), Weighting::Identity)?;
    let mut report = EepReport {
        times: times.to_vec(),
        within_cell_max: Vec::new(),
        quotient_mismatch: Vec::new(),
    };
    for &t in times {
        let psi = similarity_at(&sys, t)?;
        let d2 = distance_squared(&psi)?;
        let mut worst: f64 = 0.0;
        for i in 0..g.n() {
            for j in 0..g.n() {
                if cells.label(i) == cells.label(j) {
                    worst = worst.max(d2.values[(i, j)]);
                }
            }
        }
        report.within_cell_max.push(worst);

        let reduced = linalg::expm(&(-&quotient.quotient_laplacian * t))? * &hp;
        let psi_q = reduced.tr_mul(&reduced);
        debug_assert_eq!(reduced.nrows(), k);
        report.quotient_mismatch.push(linalg::max_abs(&(psi.values - psi_q)));
    }
    Ok(report)
}
