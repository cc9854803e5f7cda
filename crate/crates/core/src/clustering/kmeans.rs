use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Clone, Copy, Debug)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when inertia improves by less than this fraction.
    pub rel_tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 50,
            max_iter: 300,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub partition: Partition,
    pub inertia: f64,
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, k: usize) -> f64 {
    x.row(i).iter().zip(c.row(k).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plus_plus(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = x.nrows();
    let mut centers = DMatrix::zeros(k, x.ncols());
    centers.set_row(0, &x.row(rng.gen_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x, i, &centers, 0)).collect();
    for c in 1..k {
        let pick = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // All points coincide with a center already.
            Err(_) => rng.gen_range(0..n),
        };
        centers.set_row(c, &x.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x, i, &centers, c));
        }
    }
    centers
}

fn lloyd(x: &DMatrix<f64>, mut centers: DMatrix<f64>, cfg: &KMeansConfig) -> (Vec<usize>, f64) {
    let (n, k) = (x.nrows(), centers.nrows());
    let mut labels = vec![0usize; n];
    let mut prev = f64::INFINITY;
    let mut inertia = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        inertia = 0.0;
        for (i, l) in labels.iter_mut().enumerate() {
            let (mut best, mut bd) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(x, i, &centers, c);
                if d < bd {
                    best = c;
                    bd = d;
                }
            }
            *l = best;
            inertia += bd;
        }
        if prev.is_finite() && prev - inertia <= cfg.rel_tol * prev {
            break;
        }
        prev = inertia;

        let mut sums = DMatrix::zeros(k, x.ncols());
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            let mut row = sums.row_mut(l);
            row += x.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers.set_row(c, &(sums.row(c) / counts[c] as f64));
            } else {
                // Re-seed an empty cluster at the point farthest from its center.
                let far = (0..n)
                    .max_by(|&a, &b| sq_dist(x, a, &centers, labels[a]).total_cmp(&sq_dist(x, b, &centers, labels[b])))
                    .unwrap_or(0);
                centers.set_row(c, &x.row(far));
            }
        }
    }
    (labels, inertia)
}

/// k-means on the rows of `x`: k-means++ seeding, Lloyd iterations, best
/// inertia over restarts. Deterministic for a given seed.
pub fn kmeans(x: &DMatrix<f64>, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = x.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-means input has non-finite entries"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let centers = plus_plus(x, k, &mut rng);
        let (labels, inertia) = lloyd(x, centers, cfg);
        if best.as_ref().map_or(true, |b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    let (labels, inertia) = best.expect("at least one restart");
    Ok(KMeansResult {
        partition: Partition::from_labels(labels),
        inertia,
    })
}
