use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::louvain::louvain_optimize;
use super::quality::QualityConfig;
use super::vi::variation_of_information;
use crate::error::{Error, Result};
use crate::linsys::{LinearSystem, Weighting};
use crate::partition::Partition;
use crate::similarity;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanConfig {
    /// Louvain runs per time point.
    pub seeds: usize,
    pub base_seed: u64,
    /// Plateaus need mean pairwise VI below this.
    pub vi_threshold: f64,
    /// Shortest run of grid points reported as a plateau.
    pub min_plateau_len: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            seeds: 10,
            base_seed: 0,
            vi_threshold: 0.05,
            min_plateau_len: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub k: usize,
    pub mean_vi: f64,
    /// Best partition at the middle grid point of the interval.
    #[serde(skip)]
    pub partition: Partition,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub times: Vec<f64>,
    /// partitions[t][s] from seed s at time index t.
    pub partitions: Vec<Vec<Partition>>,
    pub qualities: Vec<Vec<f64>>,
    /// Highest-quality partition per time (lowest seed on ties).
    pub best: Vec<Partition>,
    /// Community count of the best partition per time.
    pub n_communities: Vec<usize>,
    /// Most frequent community count across seeds (smallest on ties).
    pub modal_k: Vec<usize>,
    /// Mean VI between the seed ensembles at t and t′.
    pub vi_matrix: DMatrix<f64>,
    pub plateaus: Vec<Plateau>,
}

#[derive(Serialize)]
pub struct ScanSummary<'a> {
    pub times: &'a [f64],
    pub n_communities: &'a [usize],
    pub modal_k: &'a [usize],
    pub best_quality: Vec<f64>,
    pub plateaus: &'a [Plateau],
}

impl ScanResult {
    pub fn summary(&self) -> ScanSummary<'_> {
        ScanSummary {
            times: &self.times,
            n_communities: &self.n_communities,
            modal_k: &self.modal_k,
            best_quality: self.qualities.iter().map(|q| q.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
            plateaus: &self.plateaus,
        }
    }
}

/// Louvain ensembles of Ψ⊥(t) = Yᵀ(I − α·ννᵀ)Y over a time grid.
pub fn time_scan(sys: &LinearSystem, times: &[f64], nu: &DVector<f64>, alpha: f64, cfg: &ScanConfig) -> Result<ScanResult> {
    if nu.len() != sys.output_dim() {
        return Err(Error::dim("time_scan", format!("ν has length {}, system has {} outputs", nu.len(), sys.output_dim())));
    }
    let w = Weighting::projector(nu.clone(), alpha)?;
    check_grid(times, cfg)?;
    let props = sys.propagators(times)?;
    let configs: Vec<QualityConfig> = times
        .iter()
        .zip(&props)
        .map(|(&t, p)| QualityConfig::from_similarity(&similarity::similarity_from_propagator(sys, p, t, &w)))
        .collect();
    drop(props);
    scan_configs(times, &configs, cfg)
}

fn check_grid(times: &[f64], cfg: &ScanConfig) -> Result<()> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("scan times must be non-empty and strictly increasing"));
    }
    if cfg.seeds < 2 {
        return Err(Error::invalid("a scan needs at least 2 seeds"));
    }
    Ok(())
}

/// Scan over precomputed quality configurations, one per time.
pub fn scan_configs(times: &[f64], configs: &[QualityConfig], cfg: &ScanConfig) -> Result<ScanResult> {
    check_grid(times, cfg)?;
    if configs.len() != times.len() {
        return Err(Error::dim("scan", format!("{} configurations for {} times", configs.len(), times.len())));
    }
    let runs: Vec<Vec<(Partition, f64)>> = configs
        .par_iter()
        .map(|q| {
            (0..cfg.seeds)
                .map(|s| {
                    let p = louvain_optimize(q, cfg.base_seed.wrapping_add(s as u64))?;
                    let score = q.score(&p);
                    Ok((p, score))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut partitions = Vec::with_capacity(times.len());
    let mut qualities = Vec::with_capacity(times.len());
    let mut best = Vec::with_capacity(times.len());
    let mut modal_k = Vec::with_capacity(times.len());
    for run in runs {
        let mut bi = 0;
        for (i, r) in run.iter().enumerate() {
            if r.1 > run[bi].1 {
                bi = i;
            }
        }
        best.push(run[bi].0.clone());
        modal_k.push(mode(run.iter().map(|r| r.0.k())));
        qualities.push(run.iter().map(|r| r.1).collect::<Vec<_>>());
        partitions.push(run.into_iter().map(|r| r.0).collect::<Vec<_>>());
    }
    let n_communities = best.iter().map(Partition::k).collect();

    let nt = times.len();
    let mut vi_matrix = DMatrix::zeros(nt, nt);
    for i in 0..nt {
        for j in i..nt {
            let mut total = 0.0;
            for a in &partitions[i] {
                for b in &partitions[j] {
                    total += variation_of_information(a, b)?;
                }
            }
            let v = total / (partitions[i].len() * partitions[j].len()) as f64;
            vi_matrix[(i, j)] = v;
            vi_matrix[(j, i)] = v;
        }
    }

    let plateaus = find_plateaus(times, &modal_k, &vi_matrix, &best, cfg);
    Ok(ScanResult {
        times: times.to_vec(),
        partitions,
        qualities,
        best,
        n_communities,
        modal_k,
        vi_matrix,
        plateaus,
    })
}

fn mode(values: impl Iterator<Item = usize>) -> usize {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    let (mut best, mut best_count) = (v[0], 0);
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().take_while(|&&x| x == v[i]).count();
        if j > best_count {
            best = v[i];
            best_count = j;
        }
        i += j;
    }
    best
}

fn block_mean(vi: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let len = (j - i + 1) as f64;
    vi.view((i, i), (j - i + 1, j - i + 1)).sum() / (len * len)
}

/// Maximal runs (scanning left to right) of constant modal k whose mean
/// pairwise VI stays below the threshold.
fn find_plateaus(times: &[f64], modal_k: &[usize], vi: &DMatrix<f64>, best: &[Partition], cfg: &ScanConfig) -> Vec<Plateau> {
    let nt = times.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < nt {
        let mut j = i;
        while j + 1 < nt && modal_k[j + 1] == modal_k[i] && block_mean(vi, i, j + 1) < cfg.vi_threshold {
            j += 1;
        }
        let mean_vi = block_mean(vi, i, j);
        if j - i + 1 >= cfg.min_plateau_len && mean_vi < cfg.vi_threshold {
            out.push(Plateau {
                start: i,
                end: j,
                t_start: times[i],
                t_end: times[j],
                k: modal_k[i],
                mean_vi,
                partition: best[(i + j) / 2].clone(),
            });
        }
        i = j + 1;
    }
    out
}

/// n points geometrically spaced from t_min to t_max inclusive.
pub fn geometric_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || !(t_max > t_min) || n < 2 {
        return Err(Error::invalid("geometric grid needs 0 < t_min < t_max and at least 2 points"));
    }
    let r = (t_max / t_min).ln() / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { t_max } else { t_min * (r * k as f64).exp() }).collect())
}
