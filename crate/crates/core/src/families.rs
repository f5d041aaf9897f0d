//! Constructors for the named graph families and the fixed example graphs.

use crate::graph::{Fin, Graph, Inf, Multiplicity};

fn build(name: String, labels: Vec<String>, edges: &[(usize, usize, Multiplicity)]) -> Graph {
    let n = labels.len();
    let mut rows = vec![vec![Fin(0); n]; n];
    for &(u, v, m) in edges {
        rows[u][v] = rows[u][v] + m;
    }
    Graph::new(labels, rows).expect("family graphs are well formed").named(&name)
}

fn tuple_name(prefix: &str, ns: &[u64]) -> String {
    let body: Vec<String> = ns.iter().map(u64::to_string).collect();
    format!("{prefix}({})", body.join(","))
}

/// Chain `b1 ← b2 ← … ← bk` with sources `ti → bi` carrying `ni − 1` edges (`nk` for the last);
/// sources with nothing to emit are omitted. `b1` carries `bottom_loop` loops.
fn chain_family(prefix: &str, ns: &[u64], bottom_loop: Multiplicity) -> Graph {
    let k = ns.len();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut source_edges = Vec::new();
    for (i, &ni) in ns.iter().enumerate() {
        let emit = if i + 1 == k { ni } else { ni - 1 };
        if emit > 0 {
            source_edges.push((format!("t{}", i + 1), i, emit));
        }
    }
    for (label, _, _) in &source_edges {
        labels.push(label.clone());
    }
    let base = labels.len();
    for i in 0..k.max(1) {
        labels.push(format!("b{}", i + 1));
    }
    for (si, (_, bi, m)) in source_edges.iter().enumerate() {
        edges.push((si, base + bi, Fin(*m)));
    }
    for i in 1..k {
        edges.push((base + i, base + i - 1, Fin(1)));
    }
    if !bottom_loop.is_zero() {
        edges.push((base, base, bottom_loop));
    }
    build(tuple_name(prefix, ns), labels, &edges)
}

/// Acyclic family; all entries must be positive. `f_graph(&[])` is a single sink.
pub fn f_graph(ns: &[u64]) -> Graph {
    assert!(ns.iter().all(|&n| n > 0), "F entries are positive");
    chain_family("F", ns, Fin(0))
}

/// Same chain as [`f_graph`] over a vertex with infinitely many loops.
pub fn h_graph(ns: &[u64]) -> Graph {
    assert!(ns.iter().all(|&n| n > 0), "H entries are positive");
    chain_family("H", ns, Inf)
}

/// Cycle `v1 → v2 → … → vk → v1` fed by one source sending `ni` edges to `vi`.
pub fn e_graph(ns: &[u64]) -> Graph {
    assert!(!ns.is_empty(), "E needs a nonempty cycle");
    let k = ns.len();
    let has_source = ns.iter().any(|&n| n > 0);
    let mut labels: Vec<String> = Vec::new();
    if has_source {
        labels.push("s".into());
    }
    let base = labels.len();
    labels.extend((1..=k).map(|i| format!("v{i}")));
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((base + i, base + (i + 1) % k, Fin(1)));
        if ns[i] > 0 {
            edges.push((0, base + i, Fin(ns[i])));
        }
    }
    build(tuple_name("E", ns), labels, &edges)
}

/// Loop vertex `v` with `c` loops fed by a source `s` with `n` edges (no source when `n = 0`).
pub fn g_graph(c: u64, n: u64) -> Graph {
    if n == 0 {
        return build(format!("G({c},0)"), vec!["v".into()], &[(0, 0, Fin(c))]);
    }
    build(format!("G({c},{n})"), vec!["s".into(), "v".into()], &[(0, 1, Fin(n)), (1, 1, Fin(c))])
}

fn from_matrix(name: &str, rows: &[&[u64]]) -> Graph {
    let labels: Vec<String> = (1..=rows.len()).map(|i| format!("x{i}")).collect();
    Graph::new(labels, rows.iter().map(|r| r.iter().map(|&k| Fin(k)).collect()).collect())
        .expect("fixed example is well formed")
        .named(name)
}

/// First of the two seven-vertex primitive graphs with Bowen–Franks data `(Z/99, −1)`.
pub fn z99_left() -> Graph {
    from_matrix(
        "z99-left",
        &[
            &[0, 0, 1, 1, 3, 0, 0],
            &[1, 0, 0, 0, 3, 0, 0],
            &[0, 1, 0, 0, 3, 0, 0],
            &[0, 0, 1, 0, 3, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1],
            &[1, 1, 1, 1, 10, 0, 0],
            &[1, 1, 1, 1, 0, 1, 0],
        ],
    )
}

/// Second graph of the pair; shift equivalent to the first.
pub fn z99_right() -> Graph {
    from_matrix(
        "z99-right",
        &[
            &[0, 0, 1, 1, 3, 0, 0],
            &[1, 0, 0, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0, 0, 0],
            &[0, 0, 1, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1],
            &[4, 5, 6, 3, 10, 0, 0],
            &[4, 5, 6, 3, 0, 1, 0],
        ],
    )
}

/// Three-vertex graph reached from the two-loop vertex by splicing and removing the new source.
pub fn splice_comparison() -> Graph {
    from_matrix("splice-comparison", &[&[2, 1, 0], &[1, 1, 1], &[0, 1, 1]])
}

/// Loop vertex feeding a two-loop vertex; the smallest input accepted by the P+ move.
pub fn p_plus_seed() -> Graph {
    from_matrix("p-plus-seed", &[&[1, 1], &[0, 2]])
}
