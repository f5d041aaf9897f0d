//! Shared corpus and random graph generators for the integration tests.
#![allow(dead_code)]

use graphmoves::families::{e_graph, f_graph, g_graph, h_graph, p_plus_seed, splice_comparison, z99_left, z99_right};
use graphmoves::graph::{Fin, Graph, Inf, Multiplicity};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random graph on `1..=max_n` vertices with finite entries in `0..=max_m`.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_m: u64) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let rows: Vec<Vec<Multiplicity>> =
        (0..n).map(|_| (0..n).map(|_| Fin(rng.gen_range(0..=max_m))).collect()).collect();
    Graph::new(labels, rows).unwrap()
}

/// Random graph with exactly one infinite entry.
pub fn random_graph_with_inf(rng: &mut ChaCha8Rng, max_n: usize, max_m: u64) -> Graph {
    let mut g = random_graph(rng, max_n, max_m);
    let (u, v) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
    g.set(u, v, Inf);
    g
}

/// All tuples of length `0..=max_len` with entries in `lo..=hi`.
pub fn tuples(lo: u64, hi: u64, max_len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|t: &Vec<u64>| (lo..=hi).map(move |x| [t.clone(), vec![x]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn f_corpus() -> Vec<Graph> {
    tuples(1, 3, 3).iter().map(|t| f_graph(t)).collect()
}

pub fn e_corpus() -> Vec<Graph> {
    tuples(0, 3, 3).iter().filter(|t| !t.is_empty()).map(|t| e_graph(t)).collect()
}

pub fn g_corpus() -> Vec<Graph> {
    (2..=3).flat_map(|c| (0..=4).map(move |n| g_graph(c, n))).collect()
}

/// Family graphs plus the fixed examples.
pub fn corpus() -> Vec<Graph> {
    let mut out = Vec::new();
    out.extend(tuples(1, 2, 3).iter().map(|t| f_graph(t)));
    out.extend(tuples(0, 2, 3).iter().filter(|t| !t.is_empty()).map(|t| e_graph(t)));
    out.extend(g_corpus());
    out.extend(tuples(1, 2, 2).iter().map(|t| h_graph(t)));
    out.extend([z99_left(), z99_right(), p_plus_seed(), splice_comparison()]);
    out.extend(pplus_examples());
    out
}

/// A loop feeding a two-loop vertex feeding a loop, and the same with doubled edges out of the first.
pub fn pplus_examples() -> Vec<Graph> {
    vec![
        Graph::from_counts(&["a", "b", "c"], &[&[1, 1, 0], &[0, 2, 1], &[0, 0, 1]]).unwrap().named("pplus-single"),
        Graph::from_counts(&["a", "b", "c"], &[&[1, 2, 2], &[0, 2, 1], &[0, 0, 1]]).unwrap().named("pplus-double"),
    ]
}
