//! Bounded bidirectional breadth-first search over move space, keyed by canonical form.

use std::collections::HashMap;
use std::fmt;

use crate::graph::{isomorphism_unguarded, Graph, GraphError, Multiplicity};
use crate::invariants::distinguish;
use crate::moves::{
    allowed_moves, apply_move, apply_trace, enumerate_applicable, invert_trace, transport_trace, EnumCaps, MoveTrace,
    Relation,
};

/// Most vertex orders tried when minimising an encoding.
pub const CANON_LIMIT: u64 = 200_000;

/// Adjacency matrix under the lexicographically least order compatible with a refined
/// vertex colouring; infinite entries encode as `u64::MAX`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u64>);

fn code(m: Multiplicity) -> u64 {
    m.finite().unwrap_or(u64::MAX)
}

/// Colour refinement until stable; colours are ranks of iso-invariant signatures.
fn refine(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut colour = vec![0usize; n];
    loop {
        let sig: Vec<_> = (0..n)
            .map(|v| {
                let mut out: Vec<(usize, u64)> = (0..n).map(|w| (colour[w], code(g.get(v, w)))).collect();
                let mut inn: Vec<(usize, u64)> = (0..n).map(|w| (colour[w], code(g.get(w, v)))).collect();
                out.sort();
                inn.sort();
                (colour[v], code(g.get(v, v)), out, inn)
            })
            .collect();
        let mut distinct = sig.clone();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sig.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        let stable = distinct.len() == colour.iter().collect::<std::collections::BTreeSet<_>>().len();
        colour = next;
        if stable {
            return colour;
        }
    }
}

fn encode(g: &Graph, order: &[usize]) -> Vec<u64> {
    let mut out = Vec::with_capacity(order.len() * order.len() + 1);
    out.push(order.len() as u64);
    for &u in order {
        out.extend(order.iter().map(|&v| code(g.get(u, v))));
    }
    out
}

/// Canonical key; equal keys exactly when the graphs are isomorphic.
pub fn canonical_key(g: &Graph) -> Result<CanonicalKey, GraphError> {
    let colour = refine(g);
    let classes = colour.iter().max().map_or(0, |&c| c + 1);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for v in 0..g.n() {
        blocks[colour[v]].push(v);
    }
    let mut count: u64 = 1;
    for b in &blocks {
        for k in 1..=b.len() as u64 {
            count = count.saturating_mul(k);
        }
    }
    if count > CANON_LIMIT {
        return Err(GraphError::GuardExceeded { size: g.n(), guard: crate::graph::ISO_GUARD });
    }
    let mut best: Option<Vec<u64>> = None;
    let mut order = Vec::with_capacity(g.n());
    fn go(g: &Graph, blocks: &mut [Vec<usize>], i: usize, order: &mut Vec<usize>, best: &mut Option<Vec<u64>>) {
        if i == blocks.len() {
            let e = encode(g, order);
            if best.as_ref().is_none_or(|b| e < *b) {
                *best = Some(e);
            }
            return;
        }
        if blocks[i].is_empty() {
            return go(g, blocks, i + 1, order, best);
        }
        for j in 0..blocks[i].len() {
            let v = blocks[i].remove(j);
            order.push(v);
            go(g, blocks, i, order, best);
            order.pop();
            blocks[i].insert(j, v);
        }
    }
    go(g, &mut blocks, 0, &mut order, &mut best);
    Ok(CanonicalKey(best.unwrap_or_default()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_depth: usize,
    pub max_states: usize,
    pub max_parts: usize,
    pub max_fanout: usize,
    pub max_vertices: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_depth: 4, max_states: 20_000, max_parts: 3, max_fanout: 4, max_vertices: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// Shortest connecting trace, then lexicographically least script.
    Found(MoveTrace),
    /// Both sides saturated under the caps without meeting.
    Closed,
    /// A depth, state or vertex limit cut the search.
    BudgetExhausted { depth: usize, states: usize },
}

impl SearchOutcome {
    pub fn trace(&self) -> Option<&MoveTrace> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invariant breach after `{trace}`: {witness}")]
    InvariantBreach { trace: String, witness: String },
    #[error("budget values must be positive")]
    BadBudget,
}

struct State {
    graph: Graph,
    trace: MoveTrace,
}

struct Side {
    seen: HashMap<CanonicalKey, State>,
    frontier: Vec<CanonicalKey>,
    depth: usize,
    cut: bool,
}

impl Side {
    fn new(g: &Graph) -> Result<Side, SearchError> {
        let k = canonical_key(g)?;
        let mut seen = HashMap::new();
        seen.insert(k.clone(), State { graph: g.clone(), trace: MoveTrace::default() });
        Ok(Side { seen, frontier: vec![k], depth: 0, cut: false })
    }
}

/// Joins a forward path `g → x` with a path `h → y`, `y ≅ x`, into a trace `g → ≅h`.
fn join(h: &Graph, fwd: &State, back: &State) -> Result<MoveTrace, SearchError> {
    let sigma = isomorphism_unguarded(&back.graph, &fwd.graph).expect("equal canonical keys");
    let undo = invert_trace(h, &back.trace).expect("search traces replay");
    let moved = transport_trace(&undo, &back.graph, &fwd.graph, &sigma).expect("isomorphic transport");
    let mut t = fwd.trace.clone();
    t.extend(moved);
    Ok(t)
}

/// Shortest trace over the moves allowed at `r` from `g` to a graph isomorphic to `h`,
/// expanding the smaller frontier first. Every explored graph is checked against `g`'s
/// invariants at level `r`.
pub fn bfs_connect(g: &Graph, h: &Graph, r: Relation, b: &SearchBudget) -> Result<SearchOutcome, SearchError> {
    if b.max_depth == 0 || b.max_states == 0 || b.max_parts == 0 || b.max_fanout == 0 || b.max_vertices == 0 {
        return Err(SearchError::BadBudget);
    }
    for x in [g, h] {
        if x.n() > b.max_vertices {
            return Err(GraphError::GuardExceeded { size: x.n(), guard: b.max_vertices }.into());
        }
    }
    if let Some(sigma) = isomorphism_unguarded(g, h) {
        let _ = sigma;
        return Ok(SearchOutcome::Found(MoveTrace::default()));
    }
    let kinds = allowed_moves(r).0;
    let caps = EnumCaps { max_parts: b.max_parts, max_fanout: Some(b.max_fanout), include_inverse: true };
    let mut sides = [Side::new(g)?, Side::new(h)?];
    let mut states = 2;
    loop {
        if sides[0].depth + sides[1].depth >= b.max_depth {
            return Ok(SearchOutcome::BudgetExhausted { depth: b.max_depth, states });
        }
        let open: Vec<usize> = (0..2).filter(|&i| !sides[i].frontier.is_empty()).collect();
        if open.len() < 2 {
            let cut = sides.iter().any(|s| s.cut);
            return Ok(if cut {
                SearchOutcome::BudgetExhausted { depth: sides[0].depth + sides[1].depth, states }
            } else {
                SearchOutcome::Closed
            });
        }
        let i = if sides[0].frontier.len() <= sides[1].frontier.len() { 0 } else { 1 };
        let seed = if i == 0 { g } else { h };
        let mut next = Vec::new();
        let mut met: Vec<MoveTrace> = Vec::new();
        let frontier = std::mem::take(&mut sides[i].frontier);
        for key in frontier {
            let (graph, trace) = {
                let s = &sides[i].seen[&key];
                (s.graph.clone(), s.trace.clone())
            };
            for plan in enumerate_applicable(&graph, &kinds, &caps) {
                let Ok(out) = apply_move(&graph, &plan) else { continue };
                if out.n() > b.max_vertices {
                    sides[i].cut = true;
                    continue;
                }
                let k = canonical_key(&out)?;
                if sides[i].seen.contains_key(&k) {
                    continue;
                }
                if states >= b.max_states {
                    return Ok(SearchOutcome::BudgetExhausted { depth: sides[0].depth + sides[1].depth, states });
                }
                let mut t = trace.clone();
                t.push(plan);
                if let Some(w) = distinguish(seed, &out, r) {
                    return Err(SearchError::InvariantBreach { trace: t.to_script(), witness: w.to_string() });
                }
                states += 1;
                let state = State { graph: out, trace: t };
                if let Some(other) = sides[1 - i].seen.get(&k) {
                    met.push(if i == 0 { join(h, &state, other)? } else { join(h, other, &state)? });
                }
                sides[i].seen.insert(k.clone(), state);
                next.push(k);
            }
        }
        sides[i].depth += 1;
        sides[i].frontier = next;
        if let Some(best) = met.into_iter().min_by_key(|t| (t.len(), t.to_script())) {
            return Ok(SearchOutcome::Found(best));
        }
    }
}

/// Outcome of [`verify_trace`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.ok { "ok" } else { "failed" })?;
        for d in &self.diagnostics {
            write!(f, "\n{d}")?;
        }
        Ok(())
    }
}

/// True when `t` uses only moves allowed at `r`, replays from `g`, and ends isomorphic to `h`.
pub fn verify_trace(g: &Graph, t: &MoveTrace, h: &Graph, r: Relation) -> Verification {
    let mut diagnostics = Vec::new();
    for (i, p) in t.steps.iter().enumerate() {
        let class = p.kind().invariance_class();
        if !r.le(class) {
            diagnostics.push(format!("step {} (`{p}`): move class {class} < required {r}", i + 1));
        }
    }
    match apply_trace(g, t) {
        Err(e) => diagnostics.push(e.to_string()),
        Ok(end) => {
            if isomorphism_unguarded(&end, h).is_none() {
                diagnostics.push(format!("endpoint after {} steps is not isomorphic to the target", t.len()));
            }
        }
    }
    Verification { ok: diagnostics.is_empty(), diagnostics }
}
