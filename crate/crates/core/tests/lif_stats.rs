use dynembed::lif::{self, LifParams};
use nalgebra::DMatrix;

fn count(w: &DMatrix<f64>, p: &LifParams, pick: impl Fn(usize, usize) -> bool) -> (usize, usize) {
    let n = p.n();
    let (mut edges, mut pairs) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if i != j && pick(i, j) {
                pairs += 1;
                edges += (w[(i, j)] != 0.0) as usize;
            }
        }
    }
    (edges, pairs)
}

fn within_three_sigma(edges: usize, pairs: usize, prob: f64) -> bool {
    let mean = pairs as f64 * prob;
    let sd = (pairs as f64 * prob * (1.0 - prob)).sqrt();
    (edges as f64 - mean).abs() <= 3.0 * sd
}

#[test]
fn connection_counts_match_probabilities() {
    let p = LifParams::default();
    let (w, _) = lif::generate_assembly_network(&p, 3).unwrap();
    let e = |i| p.is_excitatory(i);
    let same = |i, j| p.assembly(i) == p.assembly(j);
    let (ee, ee_pairs) = count(&w, &p, |i, j| e(i) && e(j));
    assert!(within_three_sigma(ee, ee_pairs, p.p_ee), "E→E {ee}/{ee_pairs}");
    let (ii, ii_pairs) = count(&w, &p, |i, j| !e(i) && !e(j));
    assert!(within_three_sigma(ii, ii_pairs, p.p_ii), "I→I {ii}/{ii_pairs}");
    // w[(i, j)] is the synapse from j onto i.
    let (ie_in, pairs) = count(&w, &p, |i, j| !e(i) && e(j) && same(i, j));
    assert!(within_three_sigma(ie_in, pairs, p.p_ie_in));
    let (ei_out, pairs) = count(&w, &p, |i, j| e(i) && !e(j) && !same(i, j));
    assert!(within_three_sigma(ei_out, pairs, p.p_ei));
}

#[test]
fn weights_carry_the_presynaptic_sign() {
    let p = LifParams::default();
    let (w, _) = lif::generate_assembly_network(&p, 4).unwrap();
    for j in 0..p.n() {
        let col = w.column(j);
        if p.is_excitatory(j) {
            assert!(col.iter().all(|&x| x >= 0.0));
        } else {
            assert!(col.iter().all(|&x| x <= 0.0));
        }
    }
}

#[test]
fn generation_and_simulation_are_reproducible() {
    let p = LifParams::scaled(2, 16, 4);
    let (w1, planted) = lif::generate_assembly_network(&p, 9).unwrap();
    let (w2, _) = lif::generate_assembly_network(&p, 9).unwrap();
    assert_eq!(w1, w2);
    assert_eq!(planted, p.planted());
    let (w3, _) = lif::generate_assembly_network(&p, 10).unwrap();
    assert_ne!(w1, w3);
    let s1 = lif::simulate_lif(&w1, &p, 300.0, 1).unwrap();
    let s2 = lif::simulate_lif(&w1, &p, 300.0, 1).unwrap();
    assert_eq!(s1.events, s2.events);
    assert!(!s1.events.is_empty());
    assert!(s1.events.windows(2).all(|e| e[0].0 <= e[1].0));
}

#[test]
fn refractory_period_is_respected() {
    let p = LifParams::scaled(2, 16, 4);
    let (w, _) = lif::generate_assembly_network(&p, 2).unwrap();
    let spikes = lif::simulate_lif(&w, &p, 500.0, 2).unwrap();
    for i in 0..p.n() {
        let t = spikes.times_of(i);
        assert!(t.windows(2).all(|x| x[1] - x[0] >= p.t_refractory - 1e-9), "neuron {i}");
    }
}
