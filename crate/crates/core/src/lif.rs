//! Leaky integrate-and-fire networks with planted excitatory/inhibitory
//! assemblies, and the linear rate model built on their weight matrix.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{geometric_grid, time_scan, variation_of_information, ScanConfig};
use crate::error::{Error, Result};
use crate::linsys::{LinearSystem, TimeMode};
use crate::partition::Partition;

/// Network and neuron parameters. Times are in ms, potentials are
/// dimensionless. Connection names read target-source: `p_ie_in` is the
/// probability of an E→I synapse inside an assembly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifParams {
    pub n_exc: usize,
    pub n_inh: usize,
    pub n_assemblies: usize,
    pub tau_m_e: f64,
    pub tau_m_i: f64,
    pub tau_s_e: f64,
    pub tau_s_i: f64,
    pub v_threshold: f64,
    pub v_reset: f64,
    pub t_refractory: f64,
    pub u_range_e: [f64; 2],
    pub u_range_i: [f64; 2],
    pub p_ee: f64,
    pub p_ii: f64,
    pub p_ie_in: f64,
    pub p_ie: f64,
    pub p_ei_in: f64,
    pub p_ei: f64,
    pub w_ee: f64,
    pub w_ii: f64,
    pub w_ie_in: f64,
    pub w_ie: f64,
    pub w_ei_in: f64,
    pub w_ei: f64,
    pub dt: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            n_exc: 800,
            n_inh: 200,
            n_assemblies: 10,
            tau_m_e: 15.0,
            tau_m_i: 10.0,
            tau_s_e: 3.0,
            tau_s_i: 2.0,
            v_threshold: 1.0,
            v_reset: 0.0,
            t_refractory: 5.0,
            u_range_e: [1.1, 1.2],
            u_range_i: [1.0, 1.05],
            p_ee: 0.2,
            p_ii: 0.5,
            p_ie_in: 0.90,
            p_ie: 0.4545,
            p_ei_in: 0.2632,
            p_ei: 0.5263,
            w_ee: 0.022,
            w_ii: 0.042,
            w_ie_in: 0.0263,
            w_ie: 0.0087,
            w_ei_in: 0.015,
            w_ei: 0.045,
            dt: 0.1,
        }
    }
}

impl LifParams {
    /// Smaller network with the same connection probabilities and weights.
    /// Rescaling the weights by n_default / n makes the rate model unstable.
    pub fn scaled(n_assemblies: usize, exc_per: usize, inh_per: usize) -> Self {
        LifParams {
            n_exc: n_assemblies * exc_per,
            n_inh: n_assemblies * inh_per,
            n_assemblies,
            ..LifParams::default()
        }
    }

    pub fn n(&self) -> usize {
        self.n_exc + self.n_inh
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_ee, self.p_ii, self.p_ie_in, self.p_ie, self.p_ei_in, self.p_ei];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("connection probabilities must lie in [0, 1]"));
        }
        let taus = [self.tau_m_e, self.tau_m_i, self.tau_s_e, self.tau_s_i, self.dt];
        if taus.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::invalid("time constants and dt must be positive"));
        }
        if !(self.t_refractory >= 0.0) {
            return Err(Error::invalid("refractory period must be nonnegative"));
        }
        if self.n_assemblies == 0 || self.n_exc % self.n_assemblies != 0 || self.n_inh % self.n_assemblies != 0 {
            return Err(Error::invalid("neuron counts must be divisible by the number of assemblies"));
        }
        for r in [self.u_range_e, self.u_range_i] {
            if !(r[0] <= r[1]) {
                return Err(Error::invalid("input ranges must satisfy lo ≤ hi"));
            }
        }
        let weights = [self.w_ee, self.w_ii, self.w_ie_in, self.w_ie, self.w_ei_in, self.w_ei];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weight magnitudes must be finite and nonnegative"));
        }
        if !(self.v_threshold > self.v_reset) {
            return Err(Error::invalid("threshold must exceed the reset potential"));
        }
        Ok(())
    }

    pub fn is_excitatory(&self, i: usize) -> bool {
        i < self.n_exc
    }

    /// Assembly of neuron i: excitatory neurons are grouped in consecutive
    /// runs, then inhibitory neurons likewise.
    pub fn assembly(&self, i: usize) -> usize {
        if i < self.n_exc {
            i / (self.n_exc / self.n_assemblies)
        } else {
            (i - self.n_exc) / (self.n_inh / self.n_assemblies)
        }
    }

    /// The mixed E+I assemblies.
    pub fn planted(&self) -> Partition {
        Partition::from_labels((0..self.n()).map(|i| self.assembly(i)))
    }

    /// One block per (assembly, type) pair.
    pub fn structural(&self) -> Partition {
        Partition::from_labels((0..self.n()).map(|i| self.assembly(i) + if self.is_excitatory(i) { 0 } else { self.n_assemblies }))
    }

    fn refractory_steps(&self) -> usize {
        (self.t_refractory / self.dt).round() as usize
    }
}

/// W_N[i, j] is the weight of the synapse j → i; excitatory columns are
/// nonnegative, inhibitory columns nonpositive, and the diagonal is zero.
pub fn generate_assembly_network(p: &LifParams, seed: u64) -> Result<(DMatrix<f64>, Partition)> {
    p.validate()?;
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let same = p.assembly(i) == p.assembly(j);
            let (prob, weight) = match (p.is_excitatory(i), p.is_excitatory(j)) {
                (true, true) => (p.p_ee, p.w_ee),
                (false, false) => (p.p_ii, -p.w_ii),
                (false, true) if same => (p.p_ie_in, p.w_ie_in),
                (false, true) => (p.p_ie, p.w_ie),
                (true, false) if same => (p.p_ei_in, -p.w_ei_in),
                (true, false) => (p.p_ei, -p.w_ei),
            };
            if rng.gen_bool(prob) {
                w[(i, j)] = weight;
            }
        }
    }
    Ok((w, p.planted()))
}

/// ẋ = (−I + W_N)x with identity input, output and weighting.
pub fn rate_model_system(w: &DMatrix<f64>) -> Result<LinearSystem> {
    if !w.is_square() {
        return Err(Error::dim("rate_model_system", format!("W_N is {}x{}", w.nrows(), w.ncols())));
    }
    let n = w.nrows();
    LinearSystem::from_operator(w - DMatrix::identity(n, n), TimeMode::Continuous)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpikeTrain {
    /// (time in ms, neuron index), sorted by time then neuron.
    pub events: Vec<(f64, usize)>,
    pub n: usize,
    pub duration: f64,
}

impl SpikeTrain {
    pub fn times_of(&self, neuron: usize) -> Vec<f64> {
        self.events.iter().filter(|e| e.1 == neuron).map(|e| e.0).collect()
    }
}

/// Draw inputs u_i and initial potentials V_i(0) ~ U[reset, threshold).
pub fn draw_initial_state(p: &LifParams, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = (0..p.n())
        .map(|i| {
            let r = if p.is_excitatory(i) { p.u_range_e } else { p.u_range_i };
            r[0] + (r[1] - r[0]) * rng.gen::<f64>()
        })
        .collect();
    let v0 = (0..p.n()).map(|_| p.v_reset + (p.v_threshold - p.v_reset) * rng.gen::<f64>()).collect();
    (u, v0)
}

pub fn simulate_lif(w: &DMatrix<f64>, p: &LifParams, duration: f64, seed: u64) -> Result<SpikeTrain> {
    let (u, v0) = draw_initial_state(p, seed);
    simulate_lif_from(w, p, duration, &u, &v0)
}

/// Forward Euler with step dt. Within a step: integrate V, detect
/// threshold crossings and reset, then decay the synaptic traces and add
/// this step's spikes so they act from the next step on.
pub fn simulate_lif_from(w: &DMatrix<f64>, p: &LifParams, duration: f64, u: &[f64], v0: &[f64]) -> Result<SpikeTrain> {
    p.validate()?;
    let n = p.n();
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::dim("simulate_lif", format!("W_N is {}x{}, parameters give {n} neurons", w.nrows(), w.ncols())));
    }
    if u.len() != n || v0.len() != n {
        return Err(Error::dim("simulate_lif", "inputs and initial potentials need one entry per neuron"));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::invalid(format!("duration {duration} must be positive")));
    }
    let dt = p.dt;
    let steps = (duration / dt).round() as usize;
    let refr = p.refractory_steps();
    let decay_e = (-dt / p.tau_s_e).exp();
    let decay_i = (-dt / p.tau_s_i).exp();
    let inv_tau: Vec<f64> = (0..n).map(|i| if p.is_excitatory(i) { 1.0 / p.tau_m_e } else { 1.0 / p.tau_m_i }).collect();

    let mut v = v0.to_vec();
    let mut hold = vec![0usize; n];
    // Σ_j W_N[i, j] g_j split by presynaptic type, since each type shares a decay rate.
    let mut syn_e = vec![0.0; n];
    let mut syn_i = vec![0.0; n];
    let mut fired = Vec::new();
    let mut events = Vec::new();

    for step in 1..=steps {
        fired.clear();
        for i in 0..n {
            if hold[i] > 0 {
                hold[i] -= 1;
                continue;
            }
            v[i] += dt * ((u[i] - v[i]) * inv_tau[i] + syn_e[i] + syn_i[i]);
            if v[i] >= p.v_threshold {
                v[i] = p.v_reset;
                hold[i] = refr;
                fired.push(i);
            } else if !v[i].is_finite() {
                return Err(Error::numerical("simulate_lif", format!("neuron {i} potential became non-finite at step {step}")));
            }
        }
        syn_e.iter_mut().for_each(|x| *x *= decay_e);
        syn_i.iter_mut().for_each(|x| *x *= decay_i);
        let t = step as f64 * dt;
        for &j in &fired {
            let target = if p.is_excitatory(j) { &mut syn_e } else { &mut syn_i };
            for (s, wij) in target.iter_mut().zip(w.column(j).iter()) {
                *s += wij;
            }
            events.push((t, j));
        }
    }
    Ok(SpikeTrain { events, n, duration })
}

/// k×T matrix of per-assembly firing rates (Hz) in consecutive windows.
pub fn assembly_coactivation(spikes: &SpikeTrain, planted: &Partition, window: f64) -> Result<DMatrix<f64>> {
    if planted.len() != spikes.n {
        return Err(Error::dim("assembly_coactivation", format!("{} neurons vs partition of {}", spikes.n, planted.len())));
    }
    if !(window > 0.0) {
        return Err(Error::invalid("window must be positive"));
    }
    let bins = ((spikes.duration / window).ceil() as usize).max(1);
    let sizes = planted.sizes();
    let mut out = DMatrix::zeros(planted.k(), bins);
    for &(t, i) in &spikes.events {
        // Spikes at exactly the end of the run belong to the last window.
        let b = ((t / window) as usize).min(bins - 1);
        out[(planted.label(i), b)] += 1.0;
    }
    for g in 0..planted.k() {
        let scale = 1000.0 / (sizes[g] as f64 * window);
        out.row_mut(g).iter_mut().for_each(|x| *x *= scale);
    }
    Ok(out)
}

/// Settings for checking that the rate model of a generated network
/// clusters into the planted assemblies.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryConfig {
    pub times: Vec<f64>,
    pub alpha: f64,
    pub scan: ScanConfig,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            // Ratio √2, so every other point is a squaring of an earlier one.
            times: geometric_grid(0.05, 51.2, 21).expect("valid grid"),
            alpha: 1.0,
            scan: ScanConfig {
                seeds: 4,
                ..ScanConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlateauReport {
    pub t_start: f64,
    pub t_end: f64,
    pub k: usize,
    pub mean_vi: f64,
    /// Smallest VI to the planted assemblies over the plateau's grid points.
    pub min_vi_to_planted: f64,
    pub min_vi_to_structural: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub seed: u64,
    pub n: usize,
    /// Some grid point inside a plateau has exactly the planted partition.
    pub recovered: bool,
    /// That partition differs from the type-split structural blocks.
    pub differs_from_structural: bool,
    pub plateaus: Vec<PlateauReport>,
    pub n_communities: Vec<usize>,
    pub times: Vec<f64>,
}

impl RecoveryReport {
    pub fn passed(&self) -> bool {
        self.recovered && self.differs_from_structural
    }
}

/// Generate a network, scan Louvain on the centered rate-model similarity
/// and compare plateau partitions with the planted assemblies.
pub fn validate_recovery(p: &LifParams, seed: u64, cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    let (w, planted) = generate_assembly_network(p, seed)?;
    let structural = p.structural();
    let sys = rate_model_system(&w)?;
    let n = p.n();
    let nu = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let scan = time_scan(&sys, &cfg.times, &nu, cfg.alpha, &cfg.scan)?;
    let mut report = RecoveryReport {
        seed,
        n,
        recovered: false,
        differs_from_structural: false,
        plateaus: Vec::new(),
        n_communities: scan.n_communities.clone(),
        times: scan.times.clone(),
    };
    for pl in &scan.plateaus {
        let mut min_planted = f64::INFINITY;
        let mut min_struct = f64::INFINITY;
        for part in &scan.best[pl.start..=pl.end] {
            let vp = variation_of_information(part, &planted)?;
            let vs = variation_of_information(part, &structural)?;
            min_planted = min_planted.min(vp);
            min_struct = min_struct.min(vs);
            if vp == 0.0 {
                report.recovered = true;
                report.differs_from_structural |= *part != structural;
            }
        }
        report.plateaus.push(PlateauReport {
            t_start: pl.t_start,
            t_end: pl.t_end,
            k: pl.k,
            mean_vi: pl.mean_vi,
            min_vi_to_planted: min_planted,
            min_vi_to_structural: min_struct,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> (LifParams, DMatrix<f64>) {
        let p = LifParams {
            n_exc: 1,
            n_inh: 0,
            n_assemblies: 1,
            ..LifParams::default()
        };
        (p, DMatrix::zeros(1, 1))
    }

    #[test]
    fn defaults_validate() {
        let p = LifParams::default();
        p.validate().unwrap();
        assert_eq!(p.n(), 1000);
        assert_eq!(p.planted().k(), 10);
        assert_eq!(p.structural().k(), 20);
        assert_eq!(p.assembly(799), 9);
        assert_eq!(p.assembly(800), 0);
        assert_eq!(p.assembly(819), 0);
        assert_eq!(p.assembly(820), 1);
    }

    #[test]
    fn isolated_neuron_closed_form() {
        let (p, w) = single();
        let s = simulate_lif_from(&w, &p, 200.0, &[1.15], &[0.0]).unwrap();
        let t = s.times_of(0);
        let first = 15.0 * (1.15f64 / 0.15).ln();
        assert!((t[0] - first).abs() <= p.dt, "{}", t[0]);
        for w in t.windows(2) {
            assert!((w[1] - w[0] - (first + 5.0)).abs() <= p.dt);
        }
    }

    #[test]
    fn subthreshold_never_fires() {
        let (p, w) = single();
        assert!(simulate_lif_from(&w, &p, 500.0, &[0.9], &[0.0]).unwrap().events.is_empty());
    }

    #[test]
    fn dale_and_no_self_loops() {
        let p = LifParams::scaled(2, 16, 4);
        let (w, planted) = generate_assembly_network(&p, 3).unwrap();
        assert_eq!(w.nrows(), 40);
        assert_eq!(planted.k(), 2);
        for j in 0..40 {
            assert_eq!(w[(j, j)], 0.0);
            for i in 0..40 {
                if p.is_excitatory(j) {
                    assert!(w[(i, j)] >= 0.0);
                } else {
                    assert!(w[(i, j)] <= 0.0);
                }
            }
        }
        assert_eq!(generate_assembly_network(&p, 3).unwrap().0, w);
    }

    #[test]
    fn coactivation_bins() {
        let planted = Partition::from_labels([0, 0, 1]);
        let empty = SpikeTrain { events: vec![], n: 3, duration: 100.0 };
        assert_eq!(assembly_coactivation(&empty, &planted, 10.0).unwrap(), DMatrix::zeros(2, 10));
        let one = SpikeTrain {
            events: vec![(5.0, 0), (15.0, 1)],
            n: 3,
            duration: 20.0,
        };
        let a = assembly_coactivation(&one, &planted, 10.0).unwrap();
        assert!(a.row(1).iter().all(|&x| x == 0.0));
        assert!((a[(0, 0)] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn rate_model_of_zero_matrix() {
        let sys = rate_model_system(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(sys.a(), &(-DMatrix::identity(3, 3)));
    }
}
