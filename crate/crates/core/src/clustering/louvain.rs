use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::quality::QualityConfig;
use crate::error::Result;
use crate::partition::Partition;

/// Per-run diagnostics.
#[derive(Clone, Debug, Default)]
pub struct LouvainTrace {
    /// Flat-partition quality after each accepted move, in order.
    pub move_scores: Vec<f64>,
    /// Flat-partition quality at the end of each level.
    pub level_scores: Vec<f64>,
}

/// Greedy node moves in a seeded random order, then contraction of the
/// communities into super-nodes, repeated until a level makes no move.
pub fn louvain_optimize(q: &QualityConfig, seed: u64) -> Result<Partition> {
    run(q, seed, None)
}

/// As `louvain_optimize`, also recording the quality after every move.
/// Scores are recomputed from scratch, so this is meant for small instances.
pub fn louvain_traced(q: &QualityConfig, seed: u64) -> Result<(Partition, LouvainTrace)> {
    let mut trace = LouvainTrace::default();
    let p = run(q, seed, Some(&mut trace))?;
    Ok((p, trace))
}

fn run(q: &QualityConfig, seed: u64, mut trace: Option<&mut LouvainTrace>) -> Result<Partition> {
    q.validate()?;
    let lambda = q.null_weight();
    let absmax = |v: &mut dyn Iterator<Item = &f64>| v.fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = absmax(&mut q.f.iter()) + lambda.abs() * absmax(&mut q.a.iter()) * absmax(&mut q.b.iter());
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Partition::singletons(q.n());
    let mut level = q.clone();

    loop {
        let m = level.n();
        let mut labels: Vec<usize> = (0..m).collect();
        let mut count = vec![1usize; m];
        let mut sum_a: Vec<f64> = level.a.iter().copied().collect();
        let mut sum_b: Vec<f64> = level.b.iter().copied().collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);

        let mut link = vec![0.0; m];
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let own = labels[i];
                let (ai, bi) = (level.a[i], level.b[i]);
                link.iter_mut().for_each(|x| *x = 0.0);
                for j in 0..m {
                    if j != i {
                        link[labels[j]] += level.f[(i, j)] + level.f[(j, i)];
                    }
                }
                count[own] -= 1;
                sum_a[own] -= ai;
                sum_b[own] -= bi;

                // Gain of adding i to d, up to terms that do not depend on d.
                // An empty community scores exactly 0.
                let gain = |d: usize| link[d] - lambda * (ai * sum_b[d] + sum_a[d] * bi);
                let mut best = own;
                let mut best_gain = gain(own);
                for d in 0..m {
                    if d != own && count[d] > 0 {
                        let g = gain(d);
                        if g > best_gain + tol {
                            best = d;
                            best_gain = g;
                        }
                    }
                }
                if count[own] > 0 && 0.0 > best_gain + tol {
                    best = count.iter().position(|&c| c == 0).expect("an empty slot exists");
                }

                labels[i] = best;
                count[best] += 1;
                sum_a[best] += ai;
                sum_b[best] += bi;
                if best != own {
                    moved = true;
                    moved_any = true;
                    if let Some(tr) = trace.as_deref_mut() {
                        let level_p = Partition::from_labels(labels.iter().copied());
                        tr.move_scores.push(q.score(&flat.compose(&level_p)));
                    }
                }
            }
            if !moved {
                break;
            }
        }

        let level_p = Partition::from_labels(labels);
        flat = flat.compose(&level_p);
        if let Some(tr) = trace.as_deref_mut() {
            tr.level_scores.push(q.score(&flat));
        }
        if !moved_any || level_p.k() == m {
            break;
        }
        level = level.aggregate(&level_p);
    }
    Ok(flat)
}
