//! Small bundled and synthetic networks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{load_edge_list, Graph};
use crate::partition::Partition;

const TRIBES_TSV: &str = include_str!("../data/tribes.tsv");

/// Signed undirected alliance/enmity network of 16 tribes.
pub fn tribes() -> Graph {
    load_edge_list(TRIBES_TSV.as_bytes(), false).expect("bundled tribes file parses")
}

pub fn tribes_tsv() -> &'static str {
    TRIBES_TSV
}

/// Two dense directed groups of `per_group` nodes each. Every ordered pair
/// is linked; weights are uniform on [0.9, 1.1] inside a group and on
/// [0.18, 0.22] across groups, drawn independently per direction.
pub fn two_clique_directed(per_group: usize, seed: u64) -> Result<(Graph, Partition)> {
    let n = 2 * per_group;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            w[(i, j)] = if i / per_group == j / per_group {
                rng.gen_range(0.9..=1.1)
            } else {
                rng.gen_range(0.18..=0.22)
            };
        }
    }
    let g = Graph::from_matrix(w, true)?;
    Ok((g, Partition::from_labels((0..n).map(|i| i / per_group))))
}

/// Directed ring 0 → 1 → … → n−1 → 0 with unit weights.
pub fn directed_cycle(n: usize) -> Result<Graph> {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        w[(i, (i + 1) % n)] = 1.0;
    }
    Graph::from_matrix(w, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tribes_shape() {
        let g = tribes();
        assert_eq!(g.n(), 16);
        assert!(g.is_signed() && !g.is_directed());
        let w = g.weights();
        let pos = w.iter().filter(|&&x| x > 0.0).count() / 2;
        let neg = w.iter().filter(|&&x| x < 0.0).count() / 2;
        assert_eq!((pos, neg), (29, 29));
    }

    #[test]
    fn two_cliques_weights_in_range() {
        let (g, planted) = two_clique_directed(5, 1).unwrap();
        assert_eq!(planted.k(), 2);
        let w = g.weights();
        for i in 0..10 {
            for j in 0..10 {
                let x = w[(i, j)];
                if i == j {
                    assert_eq!(x, 0.0);
                } else if planted.label(i) == planted.label(j) {
                    assert!((0.9..=1.1).contains(&x));
                } else {
                    assert!((0.18..=0.22).contains(&x));
                }
            }
        }
        assert!(g.is_directed());
    }

    #[test]
    fn cycle_is_a_ring() {
        let g = directed_cycle(4).unwrap();
        assert_eq!(g.out_degrees().as_slice(), &[1.0; 4]);
        assert_eq!(g.weights()[(3, 0)], 1.0);
    }
}
