use crate::graph::{Fin, Graph, Inf, Multiplicity};

/// Number of first-return paths at `u`, saturated at 2.
///
/// Intermediate vertices may repeat, so any cycle avoiding `u` among the vertices
/// lying on some return path gives infinitely many.
pub fn return_path_count(g: &Graph, u: usize) -> u64 {
    let n = g.n();
    let fwd = reach_avoiding(g, u, true);
    let bwd = reach_avoiding(g, u, false);
    let on_path: Vec<bool> = (0..n).map(|x| x != u && fwd[x] && bwd[x]).collect();
    // Kahn's algorithm on the induced subgraph; leftovers lie on a cycle.
    let mut indeg = vec![0usize; n];
    for a in (0..n).filter(|&a| on_path[a]) {
        for b in (0..n).filter(|&b| on_path[b] && !g.get(a, b).is_zero()) {
            indeg[b] += 1;
        }
    }
    let mut order = Vec::new();
    let mut stack: Vec<usize> = (0..n).filter(|&x| on_path[x] && indeg[x] == 0).collect();
    while let Some(a) = stack.pop() {
        order.push(a);
        for b in (0..n).filter(|&b| on_path[b] && !g.get(a, b).is_zero()) {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                stack.push(b);
            }
        }
    }
    if order.len() < on_path.iter().filter(|&&b| b).count() {
        return 2;
    }
    // paths[x] = number of paths x ⇝ u avoiding u in between, saturated.
    let cap = |m: Multiplicity| match m {
        Fin(k) => k.min(2),
        Inf => 2,
    };
    let mut paths = vec![0u64; n];
    for &a in order.iter().rev() {
        let mut total = cap(g.get(a, u));
        for b in (0..n).filter(|&b| on_path[b]) {
            total = total.saturating_add(cap(g.get(a, b)).saturating_mul(paths[b]));
        }
        paths[a] = total.min(2);
    }
    let mut total = cap(g.get(u, u));
    for x in (0..n).filter(|&x| on_path[x]) {
        total = total.saturating_add(cap(g.get(u, x)).saturating_mul(paths[x]));
    }
    total.min(2)
}

/// Vertices reachable from (or, with `forward = false`, co-reachable to) `u` by paths
/// of length ≥ 1 whose interior avoids `u`.
fn reach_avoiding(g: &Graph, u: usize, forward: bool) -> Vec<bool> {
    let n = g.n();
    let edge = |a: usize, b: usize| if forward { !g.get(a, b).is_zero() } else { !g.get(b, a).is_zero() };
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&x| x != u && edge(u, x)).collect();
    for &x in &stack {
        seen[x] = true;
    }
    while let Some(a) = stack.pop() {
        for b in 0..n {
            if b != u && !seen[b] && edge(a, b) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let one_loop = Graph::from_counts(&["a"], &[&[1]]).unwrap();
        assert_eq!(return_path_count(&one_loop, 0), 1);
        let two_loops = Graph::from_counts(&["a"], &[&[2]]).unwrap();
        assert_eq!(return_path_count(&two_loops, 0), 2);
        let cycle = Graph::from_counts(&["a", "b", "c"], &[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]).unwrap();
        assert_eq!(return_path_count(&cycle, 0), 1);
        // b has its own loop: a → b → b → ... → a gives infinitely many.
        let looped = Graph::from_counts(&["a", "b"], &[&[0, 1], &[1, 1]]).unwrap();
        assert_eq!(return_path_count(&looped, 0), 2);
        let branch = Graph::from_counts(&["a", "b", "c"], &[&[0, 1, 1], &[1, 0, 0], &[1, 0, 0]]).unwrap();
        assert_eq!(return_path_count(&branch, 0), 2);
        let acyclic = Graph::from_counts(&["a", "b"], &[&[0, 1], &[0, 0]]).unwrap();
        assert_eq!(return_path_count(&acyclic, 0), 0);
    }
}
