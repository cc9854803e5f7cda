use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Variation of information H(p1|p2) + H(p2|p1), in nats, divided by ln n.
pub fn variation_of_information(p1: &Partition, p2: &Partition) -> Result<f64> {
    let n = p1.len();
    if p2.len() != n {
        return Err(Error::dim("variation_of_information", format!("{n} vs {} nodes", p2.len())));
    }
    if n <= 1 {
        return Ok(0.0);
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
        *joint.entry((a, b)).or_insert(0) += 1;
    }
    let (s1, s2) = (p1.sizes(), p2.sizes());
    // Summing conditional terms n_ab ln(n_a n_b / n_ab²) makes identical
    // partitions give exactly zero, since then n_ab = n_a = n_b.
    let vi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let c = c as f64;
            c * ((s1[a] as f64 / c).ln() + (s2[b] as f64 / c).ln())
        })
        .sum();
    Ok((vi / n as f64 / (n as f64).ln()).max(0.0))
}
