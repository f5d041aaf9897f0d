//! Reductions to the five standard forms, each producing a replayable trace.
//!
//! Every reduction is a deterministic loop repairing clauses in a fixed order; ties
//! are broken by vertex order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::graph::{CorePartition, Fin, Graph, GraphError, Multiplicity};
use crate::moves::{apply_move, redistribute_via_in_split, MoveError, MovePlan, MoveTrace, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormKind {
    Std111,
    Std011,
    NoSources,
    Std101,
    Std001,
}

impl FormKind {
    pub const ALL: [FormKind; 5] =
        [FormKind::Std111, FormKind::Std011, FormKind::NoSources, FormKind::Std101, FormKind::Std001];
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Std111 => "111std",
            FormKind::Std011 => "011std",
            FormKind::NoSources => "nosource",
            FormKind::Std101 => "101std",
            FormKind::Std001 => "001std",
        })
    }
}

impl FromStr for FormKind {
    type Err = String;
    fn from_str(s: &str) -> Result<FormKind, String> {
        FormKind::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| format!("unknown form `{s}` (expected 111std, 011std, nosource, 101std or 001std)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the core is a sink, so sources cannot be removed")]
    CoreIsSink,
    #[error("move failed during reduction: {0}")]
    Move(#[from] MoveError),
    #[error("reduction exceeded {0} steps")]
    Guard(usize),
    #[error("reduction invariant violated: {0}")]
    Invariant(String),
}

/// Step bound for a single reduction.
pub const STEP_GUARD: usize = 20_000;

/// A graph together with the trace that produced it.
#[derive(Clone, Debug)]
pub struct Run {
    pub graph: Graph,
    pub trace: MoveTrace,
}

impl Run {
    pub fn new(g: &Graph) -> Run {
        Run { graph: g.clone(), trace: MoveTrace::default() }
    }

    pub fn step(&mut self, p: MovePlan) -> Result<(), FormError> {
        if self.trace.len() >= STEP_GUARD {
            return Err(FormError::Guard(STEP_GUARD));
        }
        self.graph = apply_move(&self.graph, &p)?;
        self.trace.push(p);
        Ok(())
    }

    /// Applies a redistribution, optionally as in-amalgamation plus in-split.
    pub fn redistribute(&mut self, p: MovePlan, factored: bool) -> Result<(), FormError> {
        if factored {
            for q in redistribute_via_in_split(&self.graph, &p)? {
                self.step(q)?;
            }
            Ok(())
        } else {
            self.step(p)
        }
    }

    fn label(&self, i: usize) -> String {
        self.graph.label(i).to_string()
    }

    fn partition(&self) -> Result<CorePartition, FormError> {
        Ok(self.graph.core_partition_unchecked()?)
    }
}

fn support(g: &Graph, v: usize) -> Vec<(usize, Multiplicity)> {
    (0..g.n()).filter(|&y| !g.get(v, y).is_zero()).map(|y| (y, g.get(v, y))).collect()
}

/// `v` emits exactly one edge, to `y`.
fn single_edge_to(g: &Graph, v: usize, y: usize) -> bool {
    g.row_sum(v) == Fin(1) && g.get(v, y) == Fin(1)
}

/// Out-split of `v` into single edges, loops excepted (non-core vertices have none).
fn split_into_single_edges(run: &mut Run, v: usize) -> Result<(), FormError> {
    let g = &run.graph;
    let mut parts: Vec<Profile> = Vec::new();
    for (y, m) in support(g, v) {
        let k = m.finite().ok_or_else(|| FormError::Invariant("infinite emitter outside the core".into()))?;
        for _ in 0..k {
            parts.push(vec![(g.label(y).to_string(), Fin(1))]);
        }
    }
    if parts.len() > 1 {
        let w = run.label(v);
        run.step(MovePlan::OutSplit { w, parts })?;
    }
    Ok(())
}

/// Redistribution moving the whole past of `group` from outside onto its first member.
pub(crate) fn collect_pasts(g: &Graph, group: &[usize]) -> MovePlan {
    collect(g, group, false)
}

/// Like [`collect_pasts`], also moving the edges among the members onto the first member.
pub(crate) fn collect_all_pasts(g: &Graph, group: &[usize]) -> MovePlan {
    collect(g, group, true)
}

fn collect(g: &Graph, group: &[usize], absorb_within: bool) -> MovePlan {
    let n = group.len();
    let mut splits = Vec::new();
    for s in (0..g.n()).filter(|s| !group.contains(s)) {
        let col: Vec<Multiplicity> = group.iter().map(|&x| g.get(s, x)).collect();
        let total: Multiplicity = col.iter().copied().sum();
        if total.is_zero() || col[1..].iter().all(|m| m.is_zero()) {
            continue;
        }
        let mut new = vec![Fin(0); n];
        new[0] = total;
        splits.push((g.label(s).to_string(), new));
    }
    MovePlan::Redistribute {
        group: group.iter().map(|&x| g.label(x).to_string()).collect(),
        splits,
        within: if absorb_within {
            let total: Multiplicity = group.iter().map(|&x| g.get(group[0], x)).sum();
            std::iter::once(total).chain(std::iter::repeat(Fin(0))).take(n).collect()
        } else {
            group.iter().map(|&x| g.get(group[0], x)).collect()
        },
        inverse: false,
    }
}

/// Core vertices `c` fed by a core vertex `c'` emitting a single edge, as `(c, c')`.
fn single_fed_core(g: &Graph, part: &CorePartition) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &c in &part.core {
        if let Some(&cp) = part.core.iter().find(|&&cp| single_edge_to(g, cp, c)) {
            out.push((c, cp));
        }
    }
    out
}

/// Clause repairs (2)–(4) of the 111 form; the source collection is left to the caller.
fn std111_body(run: &mut Run, factored: bool) -> Result<(), FormError> {
    loop {
        let part = run.partition()?;
        // (2) transitional vertices emit one edge each.
        if let Some(&t) = part.transitional.iter().find(|&&t| run.graph.row_sum(t) != Fin(1)) {
            split_into_single_edges(run, t)?;
            continue;
        }
        let g = &run.graph;
        // (3) at most one transitional feeder per vertex.
        let crowded = (0..g.n()).find_map(|y| {
            let feeders: Vec<usize> = part.transitional.iter().copied().filter(|&t| !g.get(t, y).is_zero()).collect();
            (feeders.len() >= 2).then_some(feeders)
        });
        if let Some(group) = crowded {
            let p = collect_pasts(g, &group);
            run.redistribute(p, factored)?;
            continue;
        }
        // (4) shift transitional feeders of a singly fed core vertex onto its feeder.
        let repair = single_fed_core(g, &part).into_iter().find_map(|(c, cp)| {
            let feeders: Vec<usize> = part.transitional.iter().copied().filter(|&t| !g.get(t, c).is_zero()).collect();
            (!feeders.is_empty()).then(|| std::iter::once(cp).chain(feeders).collect::<Vec<_>>())
        });
        if let Some(group) = repair {
            let p = collect_pasts(g, &group);
            run.redistribute(p, factored)?;
            continue;
        }
        return Ok(());
    }
}

fn collect_sources(run: &mut Run) -> Result<(), FormError> {
    let part = run.partition()?;
    if part.sources.len() >= 2 {
        let group: Vec<String> = part.sources.iter().map(|&s| run.label(s)).collect();
        run.step(MovePlan::OutMerge { w: group[0].clone(), group })?;
    }
    Ok(())
}

fn reduce_111(run: &mut Run) -> Result<(), FormError> {
    std111_body(run, false)?;
    collect_sources(run)
}

fn reduce_101(run: &mut Run) -> Result<(), FormError> {
    loop {
        let part = run.partition()?;
        match part.transitional.iter().next() {
            Some(&t) => {
                let w = run.label(t);
                run.step(MovePlan::Reduce { w })?;
            }
            None => break,
        }
    }
    collect_sources(run)
}

fn reduce_001(run: &mut Run) -> Result<(), FormError> {
    loop {
        let part = run.partition()?;
        match part.sources.iter().find(|&&s| run.graph.is_regular(s)) {
            Some(&s) => {
                let w = run.label(s);
                run.step(MovePlan::RemoveSource { w })?;
            }
            None => return Ok(()),
        }
    }
}

/// Reduction to the 011 form; returns `#sources + #transitional` after each macro step.
fn reduce_011(run: &mut Run) -> Result<Vec<usize>, FormError> {
    std111_body(run, true)?;
    let part = run.partition()?;
    for s in part.sources.iter().rev() {
        split_into_single_edges(run, *s)?;
    }
    let count = |run: &Run| -> Result<usize, FormError> {
        let p = run.partition()?;
        Ok(p.sources.len() + p.transitional.len())
    };
    let mut counter = vec![count(run)?];
    loop {
        let part = run.partition()?;
        let g = &run.graph;
        let outside = |v: usize| !part.core.contains(&v);
        let mut merge: Option<Vec<usize>> = None;
        for y in 0..g.n() {
            let trans: Vec<usize> = part.transitional.iter().copied().filter(|&t| !g.get(t, y).is_zero()).collect();
            let srcs: Vec<usize> = part.sources.iter().copied().filter(|&s| !g.get(s, y).is_zero()).collect();
            if let (Some(&t), false) = (trans.first(), srcs.is_empty()) {
                merge = Some(std::iter::once(t).chain(srcs).collect());
            } else if trans.is_empty() && srcs.len() >= 2 {
                merge = Some(srcs);
            }
            if merge.is_some() {
                break;
            }
        }
        if merge.is_none() {
            merge = single_fed_core(g, &part).into_iter().find_map(|(c, cp)| {
                let feeders: Vec<usize> = (0..g.n()).filter(|&v| outside(v) && !g.get(v, c).is_zero()).collect();
                (!feeders.is_empty()).then(|| std::iter::once(cp).chain(feeders).collect())
            });
        }
        let Some(group) = merge else { break };
        let names: Vec<String> = group.iter().map(|&v| run.label(v)).collect();
        run.step(MovePlan::InMerge { w: names[0].clone(), group: names })?;
        let now = count(run)?;
        if now >= *counter.last().unwrap() {
            return Err(FormError::Invariant("source and transitional count did not decrease".into()));
        }
        counter.push(now);
    }
    Ok(counter)
}

fn shortest_core_path(g: &Graph, core: &BTreeSet<usize>, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = from;
    while let Some(a) = queue.pop_front() {
        if a == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for b in g.successors(a) {
            if core.contains(&b) && prev[b] == usize::MAX {
                prev[b] = a;
                queue.push_back(b);
            }
        }
    }
    None
}

fn reduce_no_sources(run: &mut Run) -> Result<(), FormError> {
    if run.graph.is_acyclic() {
        return Err(FormError::CoreIsSink);
    }
    reduce_011(run)?;
    let part = run.partition()?;
    if part.sources.is_empty() && part.transitional.is_empty() {
        return Ok(());
    }
    let g = &run.graph;
    if !single_fed_core(g, &part).iter().any(|_| true) {
        // Create a core vertex emitting one non-loop edge.
        let branching = part.core.iter().copied().find(|&x| g.successors(x).any(|y| y != x));
        match branching {
            Some(x) => {
                let y = g.successors(x).find(|&y| y != x).unwrap();
                isolate_edge(run, x, y)?;
            }
            None => {
                let v = *part.core.iter().next().unwrap();
                let rest = g.get(v, v).checked_sub(Fin(1)).unwrap_or(g.get(v, v));
                let w = run.label(v);
                run.step(MovePlan::OutSplit {
                    w: w.clone(),
                    parts: vec![vec![(w.clone(), Fin(1))], vec![(w.clone(), rest)]],
                })?;
                let (a, b) = (format!("{w}#1"), format!("{w}#2"));
                let (ai, bi) = (run.graph.index(&a).unwrap(), run.graph.index(&b).unwrap());
                isolate_edge(run, ai, bi)?;
            }
        }
        reduce_011(run)?;
    }
    loop {
        let part = run.partition()?;
        let g = &run.graph;
        let outside = |v: usize| !part.core.contains(&v);
        let fed = |c: usize| (0..g.n()).any(|v| outside(v) && !g.get(v, c).is_zero());
        let Some(v1) = (0..g.n()).find(|&v| outside(v) && g.successors(v).any(|c| part.core.contains(&c))) else {
            break;
        };
        let c1 = g.successors(v1).find(|c| part.core.contains(c)).unwrap();
        let c0 = part
            .core
            .iter()
            .copied()
            .find(|&c| !fed(c))
            .ok_or_else(|| FormError::Invariant("no core vertex receives only from the core".into()))?;
        let path = shortest_core_path(g, &part.core, c0, c1)
            .ok_or_else(|| FormError::Invariant("core is not strongly connected".into()))?;
        let i = (0..path.len() - 1).find(|&i| fed(path[i + 1])).unwrap();
        let (c0p, c1p) = (path[i], path[i + 1]);
        let v1p = (0..g.n()).find(|&v| outside(v) && !g.get(v, c1p).is_zero()).unwrap();
        let v1p_name = run.label(v1p);
        let c2 = isolate_edge(run, c0p, c1p)?;
        run.step(MovePlan::InMerge { w: c2.clone(), group: vec![c2, v1p_name] })?;
        reduce_011(run)?;
    }
    Ok(())
}

/// Out-splits `x` so that one copy emits exactly one edge to `y`; returns that copy's name.
fn isolate_edge(run: &mut Run, x: usize, y: usize) -> Result<String, FormError> {
    let g = &run.graph;
    if single_edge_to(g, x, y) {
        return Ok(run.label(x));
    }
    let mut rest: Profile = Vec::new();
    for (z, m) in support(g, x) {
        let m = if z == y { m.checked_sub(Fin(1)).unwrap_or(m) } else { m };
        if !m.is_zero() {
            rest.push((g.label(z).to_string(), m));
        }
    }
    let w = run.label(x);
    run.step(MovePlan::OutSplit { w: w.clone(), parts: vec![vec![(g.label(y).to_string(), Fin(1))], rest] })?;
    Ok(format!("{w}#1"))
}

/// Reduces `g` to the standard form `f`, returning the form and its certifying trace.
pub fn reduce(g: &Graph, f: FormKind) -> Result<(Graph, MoveTrace), FormError> {
    if !g.is_gauge_simple() {
        return Err(GraphError::NotGaugeSimple.into());
    }
    let mut run = Run::new(g);
    match f {
        FormKind::Std111 => reduce_111(&mut run)?,
        FormKind::Std011 => {
            reduce_011(&mut run)?;
        }
        FormKind::NoSources => reduce_no_sources(&mut run)?,
        FormKind::Std101 => reduce_101(&mut run)?,
        FormKind::Std001 => reduce_001(&mut run)?,
    }
    Ok((run.graph, run.trace))
}

/// Like [`reduce`] for the 011 form, also returning `#sources + #transitional` after each
/// macro step of the source-erasing loop.
pub fn reduce_011_counted(g: &Graph) -> Result<(Graph, MoveTrace, Vec<usize>), FormError> {
    if !g.is_gauge_simple() {
        return Err(GraphError::NotGaugeSimple.into());
    }
    let mut run = Run::new(g);
    let counter = reduce_011(&mut run)?;
    Ok((run.graph, run.trace, counter))
}

/// Clauses of `f` violated by `g`; empty when `g` is in the form.
pub fn verify_form(g: &Graph, f: FormKind) -> Vec<String> {
    let part = match g.core_partition() {
        Ok(p) => p,
        Err(e) => return vec![e.to_string()],
    };
    let mut bad = Vec::new();
    let outside = |v: usize| !part.core.contains(&v);
    let feeders =
        |y: usize, keep: &dyn Fn(usize) -> bool| (0..g.n()).filter(|&v| keep(v) && !g.get(v, y).is_zero()).count();
    let clause4 = |keep: &dyn Fn(usize) -> bool, what: &str, bad: &mut Vec<String>| {
        for (c, _) in single_fed_core(g, &part) {
            if feeders(c, keep) > 0 {
                bad.push(format!(
                    "core vertex `{}` has a single-edge core feeder but receives from {what}",
                    g.label(c)
                ));
            }
        }
    };
    match f {
        FormKind::Std111 => {
            if part.sources.len() > 1 {
                bad.push("more than one source".into());
            }
            for &t in &part.transitional {
                if g.row_sum(t) != Fin(1) {
                    bad.push(format!("transitional vertex `{}` does not emit exactly one edge", g.label(t)));
                }
            }
            let non_source_outside = |v: usize| outside(v) && !part.sources.contains(&v);
            for y in part.transitional.iter().chain(&part.core) {
                if feeders(*y, &non_source_outside) > 1 {
                    bad.push(format!("`{}` receives from several non-source vertices outside the core", g.label(*y)));
                }
            }
            clause4(&|v| part.transitional.contains(&v), "a transitional vertex", &mut bad);
        }
        FormKind::Std011 => {
            for &s in &part.sources {
                if g.is_regular(s) && g.row_sum(s) != Fin(1) {
                    bad.push(format!("source `{}` does not emit exactly one edge", g.label(s)));
                }
            }
            for &t in &part.transitional {
                if g.row_sum(t) != Fin(1) || g.col_sum(t) != Fin(1) {
                    bad.push(format!(
                        "transitional vertex `{}` does not receive and emit exactly one edge",
                        g.label(t)
                    ));
                }
            }
            for &c in &part.core {
                if feeders(c, &outside) > 1 {
                    bad.push(format!("core vertex `{}` receives from several vertices outside the core", g.label(c)));
                }
            }
            clause4(&outside, "outside the core", &mut bad);
        }
        FormKind::NoSources => {
            if !part.sources.is_empty() {
                bad.push("there are sources".into());
            }
            if !part.transitional.is_empty() {
                bad.push("there are transitional vertices".into());
            }
        }
        FormKind::Std101 => {
            if part.sources.len() > 1 {
                bad.push("more than one source".into());
            }
            if !part.transitional.is_empty() {
                bad.push("there are transitional vertices".into());
            }
        }
        FormKind::Std001 => {
            if !part.sources.is_empty() {
                bad.push("there are sources".into());
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use crate::graph::isomorphism_unguarded;
    use crate::moves::apply_trace;

    fn check(g: &Graph, f: FormKind) -> Graph {
        let (out, t) = reduce(g, f).unwrap_or_else(|e| panic!("{f} on {}: {e}", g.to_text()));
        assert_eq!(apply_trace(g, &t).unwrap(), out);
        assert!(verify_form(&out, f).is_empty(), "{f} on {}: {:?}", g.name(), verify_form(&out, f));
        out
    }

    #[test]
    fn worked_reductions() {
        assert!(isomorphism_unguarded(&check(&f_graph(&[2, 1, 3]), FormKind::Std001), &f_graph(&[])).is_some());
        assert!(isomorphism_unguarded(&check(&f_graph(&[2, 3]), FormKind::Std101), &f_graph(&[5])).is_some());
        assert!(isomorphism_unguarded(&check(&e_graph(&[2, 1]), FormKind::Std011), &e_graph(&[0, 0])).is_some());
    }

    #[test]
    fn clause_diagnostics() {
        assert!(verify_form(&e_graph(&[0, 0]), FormKind::Std011).is_empty());
        let bad = verify_form(&f_graph(&[1, 1]), FormKind::Std101);
        assert_eq!(bad, vec!["there are transitional vertices".to_string()]);
    }

    #[test]
    fn all_forms_on_families() {
        let graphs =
            [f_graph(&[2, 1, 3]), f_graph(&[1, 1]), e_graph(&[2, 0, 1]), g_graph(2, 3), h_graph(&[1, 2]), z99_left()];
        for g in &graphs {
            for f in FormKind::ALL {
                if f == FormKind::NoSources && g.is_acyclic() {
                    assert_eq!(reduce(g, f).unwrap_err(), FormError::CoreIsSink);
                    continue;
                }
                check(g, f);
            }
        }
    }
}
