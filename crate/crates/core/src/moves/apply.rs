use std::collections::{BTreeMap, BTreeSet};

use super::paths::return_path_count;
use super::{MoveError, MovePlan, Profile};
use crate::graph::{isomorphism_unguarded, Fin, Graph, Inf, Multiplicity};

type Res<T> = Result<T, MoveError>;

fn pre(msg: impl Into<String>) -> MoveError {
    MoveError::Precondition(msg.into())
}

fn idx(g: &Graph, name: &str) -> Res<usize> {
    g.index(name).ok_or_else(|| MoveError::UnknownVertex(name.to_string()))
}

/// Resolves a group of distinct vertex names.
fn group_indices(g: &Graph, group: &[String]) -> Res<Vec<usize>> {
    let mut out = Vec::with_capacity(group.len());
    for name in group {
        let i = idx(g, name)?;
        if out.contains(&i) {
            return Err(pre(format!("vertex `{name}` listed twice")));
        }
        out.push(i);
    }
    if out.is_empty() {
        return Err(pre("empty vertex group"));
    }
    Ok(out)
}

/// Profile as a dense vector over the vertices of `g`; names must exist and be distinct.
fn dense(g: &Graph, p: &Profile) -> Res<Vec<Multiplicity>> {
    let mut v = vec![Fin(0); g.n()];
    let mut seen = BTreeSet::new();
    for (name, m) in p {
        let i = idx(g, name)?;
        if !seen.insert(i) {
            return Err(pre(format!("vertex `{name}` appears twice in one part")));
        }
        v[i] = *m;
    }
    Ok(v)
}

/// Collision check for names introduced by a move; `freed` are names removed by it.
fn check_fresh(g: &Graph, names: &[String], freed: &[usize]) -> Res<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !crate::graph::valid_label(n) {
            return Err(pre(format!("`{n}` is not a valid vertex name")));
        }
        if let Some(i) = g.index(n) {
            if !freed.contains(&i) {
                return Err(MoveError::NameCollision(n.clone()));
            }
        }
        if !seen.insert(n.clone()) {
            return Err(MoveError::NameCollision(n.clone()));
        }
    }
    Ok(())
}

/// Graph on the kept vertices of `g` (in order) followed by `added`, with entries from `f`.
/// Vertex ids `< g.n()` refer to old vertices, `g.n() + k` to the `k`-th added one.
fn rebuild(g: &Graph, keep: &[usize], added: &[String], f: impl Fn(usize, usize) -> Multiplicity) -> Graph {
    let ids: Vec<usize> = keep.iter().copied().chain((0..added.len()).map(|k| g.n() + k)).collect();
    let labels: Vec<String> = keep.iter().map(|&i| g.label(i).to_string()).chain(added.iter().cloned()).collect();
    let rows = ids.iter().map(|&a| ids.iter().map(|&b| f(a, b)).collect()).collect();
    Graph::new(labels, rows).expect("moves keep graphs well formed").named(g.name())
}

fn derived(w: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{w}#{i}")).collect()
}

fn sum_over(v: impl IntoIterator<Item = Multiplicity>) -> Multiplicity {
    v.into_iter().sum()
}

/// Decides applicability; the error names the violated clause.
pub fn check_preconditions(g: &Graph, p: &MovePlan) -> Result<(), MoveError> {
    apply_move(g, p).map(|_| ())
}

pub fn apply_move(g: &Graph, p: &MovePlan) -> Result<Graph, MoveError> {
    match p {
        MovePlan::OutSplit { w, parts } => out_split(g, w, parts),
        MovePlan::OutMerge { w, group } => out_merge(g, w, group),
        MovePlan::InSplit { w, parts } => in_split(g, w, parts),
        MovePlan::InMerge { w, group } => in_merge(g, w, group),
        MovePlan::Redistribute { group, splits, within, .. } => redistribute(g, group, splits, within),
        MovePlan::Reduce { w } => reduce(g, w),
        MovePlan::Unreduce { w, source, coeffs } => unreduce(g, w, source, coeffs),
        MovePlan::RemoveSource { w } => remove_source(g, w),
        MovePlan::AddSource { w, row } => add_source(g, w, row),
        MovePlan::Splice { u } => splice(g, u, None),
        MovePlan::Unsplice { u } => unsplice(g, u),
        MovePlan::Enclose { u } => enclose(g, u),
        MovePlan::Unenclose { u } => unenclose(g, u),
    }
}

fn out_split(g: &Graph, w: &str, parts: &[Profile]) -> Res<Graph> {
    let wi = idx(g, w)?;
    if g.row_sum(wi).is_zero() {
        return Err(pre(format!("`{w}` is a sink")));
    }
    if parts.is_empty() {
        return Err(pre("out-split needs at least one part"));
    }
    let dense_parts: Vec<Vec<Multiplicity>> = parts.iter().map(|p| dense(g, p)).collect::<Res<_>>()?;
    for (j, p) in dense_parts.iter().enumerate() {
        if p.iter().all(|m| m.is_zero()) {
            return Err(pre(format!("part {} is empty", j + 1)));
        }
    }
    if dense_parts.iter().filter(|p| p.iter().any(|m| m.is_inf())).count() > 1 {
        return Err(pre("more than one part is infinite"));
    }
    for y in 0..g.n() {
        if sum_over(dense_parts.iter().map(|p| p[y])) != g.get(wi, y) {
            return Err(pre(format!("parts do not sum to the edges from `{w}` to `{}`", g.label(y))));
        }
    }
    let names = derived(w, parts.len());
    check_fresh(g, &names, &[wi])?;
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != wi).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &names, |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b),
        (false, true) => g.get(a, wi),
        (true, false) => dense_parts[a - n0][b],
        (true, true) => dense_parts[a - n0][wi],
    }))
}

fn out_merge(g: &Graph, w: &str, group: &[String]) -> Res<Graph> {
    let xs = group_indices(g, group)?;
    for &x in &xs {
        if g.row_sum(x).is_zero() {
            return Err(pre(format!("`{}` is a sink", g.label(x))));
        }
    }
    if xs.iter().filter(|&&x| g.row_sum(x).is_inf()).count() > 1 {
        return Err(pre("more than one merged vertex emits infinitely many edges"));
    }
    let inside: BTreeSet<usize> = xs.iter().copied().collect();
    for y in (0..g.n()).filter(|y| !inside.contains(y)) {
        if xs.iter().any(|&x| g.get(y, x) != g.get(y, xs[0])) {
            return Err(pre(format!("`{}` does not send equally to the merged vertices", g.label(y))));
        }
    }
    for &xj in &xs {
        if xs.iter().any(|&xi| g.get(xj, xi) != g.get(xj, xs[0])) {
            return Err(pre(format!("`{}` does not send equally within the group", g.label(xj))));
        }
    }
    check_fresh(g, &[w.to_string()], &xs)?;
    let keep: Vec<usize> = (0..g.n()).filter(|y| !inside.contains(y)).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &[w.to_string()], |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b),
        (false, true) => g.get(a, xs[0]),
        (true, false) => sum_over(xs.iter().map(|&x| g.get(x, b))),
        (true, true) => sum_over(xs.iter().map(|&x| g.get(x, xs[0]))),
    }))
}

fn in_split(g: &Graph, w: &str, parts: &[Profile]) -> Res<Graph> {
    let wi = idx(g, w)?;
    if !g.is_regular(wi) {
        return Err(pre(format!("`{w}` is not regular")));
    }
    if parts.is_empty() {
        return Err(pre("in-split needs at least one part"));
    }
    let dense_parts: Vec<Vec<Multiplicity>> = parts.iter().map(|p| dense(g, p)).collect::<Res<_>>()?;
    for s in 0..g.n() {
        if sum_over(dense_parts.iter().map(|p| p[s])) != g.get(s, wi) {
            return Err(pre(format!("parts do not sum to the edges from `{}` to `{w}`", g.label(s))));
        }
    }
    let names = derived(w, parts.len());
    check_fresh(g, &names, &[wi])?;
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != wi).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &names, |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b),
        (false, true) => dense_parts[b - n0][a],
        (true, false) => g.get(wi, b),
        (true, true) => dense_parts[b - n0][wi],
    }))
}

/// Identical rows on the whole vertex set.
fn same_rows(g: &Graph, xs: &[usize]) -> bool {
    xs.iter().all(|&x| g.row(x) == g.row(xs[0]))
}

fn in_merge(g: &Graph, w: &str, group: &[String]) -> Res<Graph> {
    let xs = group_indices(g, group)?;
    if !xs.iter().all(|&x| g.is_regular(x)) {
        return Err(pre("merged vertices must be regular"));
    }
    if !same_rows(g, &xs) {
        return Err(pre("merged vertices do not have identical rows"));
    }
    check_fresh(g, &[w.to_string()], &xs)?;
    let inside: BTreeSet<usize> = xs.iter().copied().collect();
    let keep: Vec<usize> = (0..g.n()).filter(|y| !inside.contains(y)).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &[w.to_string()], |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b),
        (false, true) => sum_over(xs.iter().map(|&x| g.get(a, x))),
        (true, false) => g.get(xs[0], b),
        (true, true) => sum_over(xs.iter().map(|&x| g.get(xs[0], x))),
    }))
}

fn redistribute(
    g: &Graph,
    group: &[String],
    splits: &[(String, Vec<Multiplicity>)],
    within: &[Multiplicity],
) -> Res<Graph> {
    let xs = group_indices(g, group)?;
    if xs.len() < 2 {
        return Err(pre("redistribution needs at least two vertices"));
    }
    if !xs.iter().all(|&x| g.is_regular(x)) {
        return Err(pre("redistributed vertices must be regular"));
    }
    if !same_rows(g, &xs) {
        return Err(pre("redistributed vertices do not have identical rows"));
    }
    if within.len() != xs.len() {
        return Err(pre("within-group row has the wrong length"));
    }
    if sum_over(within.iter().copied()) != sum_over(xs.iter().map(|&x| g.get(xs[0], x))) {
        return Err(pre("within-group row changes its total"));
    }
    let mut cols: BTreeMap<usize, &Vec<Multiplicity>> = BTreeMap::new();
    for (s, split) in splits {
        let si = idx(g, s)?;
        if xs.contains(&si) {
            return Err(pre(format!("`{s}` belongs to the group")));
        }
        if split.len() != xs.len() {
            return Err(pre(format!("split for `{s}` has the wrong length")));
        }
        if sum_over(split.iter().copied()) != sum_over(xs.iter().map(|&x| g.get(si, x))) {
            return Err(pre(format!("split for `{s}` changes its total")));
        }
        if cols.insert(si, split).is_some() {
            return Err(pre(format!("`{s}` listed twice")));
        }
    }
    let pos: BTreeMap<usize, usize> = xs.iter().enumerate().map(|(j, &x)| (x, j)).collect();
    let keep: Vec<usize> = (0..g.n()).collect();
    Ok(rebuild(g, &keep, &[], |a, b| match pos.get(&b) {
        None => g.get(a, b),
        Some(&j) if pos.contains_key(&a) => within[j],
        Some(&j) => cols.get(&a).map_or(g.get(a, b), |c| c[j]),
    }))
}

fn reduce(g: &Graph, w: &str) -> Res<Graph> {
    let wi = idx(g, w)?;
    if !g.is_regular(wi) {
        return Err(pre(format!("`{w}` is not regular")));
    }
    if !g.get(wi, wi).is_zero() {
        return Err(pre(format!("`{w}` supports a loop")));
    }
    let name = format!("{w}~");
    check_fresh(g, std::slice::from_ref(&name), &[wi])?;
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != wi).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &[name], |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b) + g.get(a, wi).times(g.get(wi, b)),
        (true, false) => g.get(wi, b),
        _ => Fin(0),
    }))
}

fn is_regular_source(g: &Graph, s: usize) -> bool {
    g.col_sum(s).is_zero() && g.is_regular(s)
}

fn unreduce(g: &Graph, w: &str, source: &str, coeffs: &[(String, Multiplicity)]) -> Res<Graph> {
    let si = idx(g, source)?;
    if !is_regular_source(g, si) {
        return Err(pre(format!("`{source}` is not a regular source")));
    }
    let mut k = vec![Fin(0); g.n()];
    for (x, m) in coeffs {
        let xi = idx(g, x)?;
        if xi == si {
            return Err(pre("the source cannot feed the restored vertex"));
        }
        if !k[xi].is_zero() {
            return Err(pre(format!("`{x}` listed twice")));
        }
        k[xi] = *m;
    }
    let mut rows = g.rows();
    for x in 0..g.n() {
        if k[x].is_zero() {
            continue;
        }
        for y in 0..g.n() {
            let sub = k[x].times(g.get(si, y));
            if sub.is_zero() {
                continue;
            }
            rows[x][y] = match (rows[x][y], sub) {
                (Inf, _) => Inf,
                (have, sub) => have.checked_sub(sub).ok_or_else(|| {
                    pre(format!(
                        "`{x}` lacks the edges to `{}` composed through the source",
                        g.label(y),
                        x = g.label(x)
                    ))
                })?,
            };
        }
    }
    check_fresh(g, &[w.to_string()], &[si])?;
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != si).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &[w.to_string()], |a, b| match (a >= n0, b >= n0) {
        (false, false) => rows[a][b],
        (false, true) => k[a],
        (true, false) => g.get(si, b),
        (true, true) => Fin(0),
    }))
}

fn remove_source(g: &Graph, w: &str) -> Res<Graph> {
    let wi = idx(g, w)?;
    if !is_regular_source(g, wi) {
        return Err(pre(format!("`{w}` is not a regular source")));
    }
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != wi).collect();
    Ok(rebuild(g, &keep, &[], |a, b| g.get(a, b)))
}

fn add_source(g: &Graph, w: &str, row: &Profile) -> Res<Graph> {
    let r = dense(g, row)?;
    if r.iter().any(|m| m.is_inf()) || r.iter().all(|m| m.is_zero()) {
        return Err(pre("an added source needs a finite nonzero row"));
    }
    check_fresh(g, &[w.to_string()], &[])?;
    let keep: Vec<usize> = (0..g.n()).collect();
    let n0 = g.n();
    Ok(rebuild(g, &keep, &[w.to_string()], |a, b| match (a >= n0, b >= n0) {
        (false, false) => g.get(a, b),
        (true, false) => r[b],
        _ => Fin(0),
    }))
}

fn splice_names(u: &str) -> [String; 3] {
    [format!("{u}+1"), format!("{u}+2"), format!("{u}+3")]
}

fn splice_check(g: &Graph, ui: usize) -> Res<()> {
    if !g.is_regular(ui) {
        return Err(pre(format!("`{}` is not regular", g.label(ui))));
    }
    if return_path_count(g, ui) < 2 {
        return Err(pre(format!("`{}` does not support two distinct return paths", g.label(ui))));
    }
    Ok(())
}

/// Attaches the splice gadget at `u`; `checked = None` runs the precondition.
fn splice(g: &Graph, u: &str, checked: Option<()>) -> Res<Graph> {
    let ui = idx(g, u)?;
    if checked.is_none() {
        splice_check(g, ui)?;
    }
    let names = splice_names(u);
    check_fresh(g, &names, &[])?;
    let n0 = g.n();
    let (u1, u2, u3) = (n0, n0 + 1, n0 + 2);
    let keep: Vec<usize> = (0..n0).collect();
    Ok(rebuild(g, &keep, &names, |a, b| {
        let one = (a == ui && b == u1)
            || (a == u1 && (b == ui || b == u1 || b == u2))
            || (a == u2 && (b == u1 || b == u2))
            || (a == u3 && b == ui);
        if a < n0 && b < n0 {
            g.get(a, b)
        } else if one {
            Fin(1)
        } else {
            Fin(0)
        }
    }))
}

/// Support of a row as `(vertex, multiplicity)` pairs.
fn support(v: &[Multiplicity]) -> Vec<(usize, Multiplicity)> {
    v.iter().enumerate().filter(|(_, m)| !m.is_zero()).map(|(i, m)| (i, *m)).collect()
}

fn ones(ids: &[usize]) -> Vec<(usize, Multiplicity)> {
    let mut s: Vec<usize> = ids.to_vec();
    s.sort();
    s.into_iter().map(|i| (i, Fin(1))).collect()
}

/// Extra in-edges `(from, count)` into the second gadget vertex, as left by an enclosure.
type Extra = Option<(usize, Multiplicity)>;

/// Checks that `(u1, u2, u3)` carry exactly the splice gadget attached at `u`.
fn gadget_at(g: &Graph, u: usize, u1: usize, u2: usize, u3: usize, extra: Extra) -> bool {
    let mut all = BTreeSet::from([u, u1, u2, u3]);
    if let Some((e, _)) = extra {
        all.insert(e);
    }
    if all.len() != 4 + extra.is_some() as usize {
        return false;
    }
    let mut col_u2 = ones(&[u1, u2]);
    if let Some((e, m)) = extra {
        col_u2.push((e, m));
        col_u2.sort();
    }
    support(g.row(u1)) == ones(&[u, u1, u2])
        && support(&g.col(u1)) == ones(&[u, u1, u2])
        && support(g.row(u2)) == ones(&[u1, u2])
        && support(&g.col(u2)) == col_u2
        && support(g.row(u3)) == ones(&[u])
        && g.col_sum(u3).is_zero()
}

/// Finds the gadget at `u`, preferring the derived names.
fn find_gadget(g: &Graph, u: usize, names: &[String; 3], extra: Extra) -> Option<[usize; 3]> {
    if let (Some(a), Some(b), Some(c)) = (g.index(&names[0]), g.index(&names[1]), g.index(&names[2])) {
        if gadget_at(g, u, a, b, c, extra) {
            return Some([a, b, c]);
        }
    }
    for u1 in g.successors(u).collect::<Vec<_>>() {
        for u2 in g.successors(u1).collect::<Vec<_>>() {
            for u3 in g.predecessors(u).collect::<Vec<_>>() {
                if gadget_at(g, u, u1, u2, u3, extra) {
                    return Some([u1, u2, u3]);
                }
            }
        }
    }
    None
}

fn unsplice(g: &Graph, u: &str) -> Res<Graph> {
    let ui = idx(g, u)?;
    let [a, b, c] = find_gadget(g, ui, &splice_names(u), None)
        .ok_or_else(|| MoveError::PatternNotFound(format!("no splice gadget attached at `{u}`")))?;
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != a && x != b && x != c).collect();
    let out = rebuild(g, &keep, &[], |x, y| g.get(x, y));
    splice_check(&out, out.index(u).unwrap())
        .map_err(|e| MoveError::PatternNotFound(format!("removing the gadget leaves an invalid graph: {e}")))?;
    Ok(out)
}

fn enclose_check(g: &Graph, ui: usize) -> Res<Vec<usize>> {
    let u = g.label(ui);
    if !g.is_regular(ui) {
        return Err(pre(format!("`{u}` is not regular")));
    }
    if g.get(ui, ui) != Fin(1) || return_path_count(g, ui) != 1 {
        return Err(pre(format!("`{u}` does not support exactly one return path, a single loop")));
    }
    let targets: Vec<usize> = g.successors(ui).filter(|&w| w != ui).collect();
    if targets.is_empty() {
        return Err(pre(format!("the loop at `{u}` has no exit")));
    }
    for &w in &targets {
        if !g.is_regular(w) {
            return Err(pre(format!("`{}` is not regular", g.label(w))));
        }
        if return_path_count(g, w) < 2 {
            return Err(pre(format!("`{}` does not support two distinct return paths", g.label(w))));
        }
    }
    Ok(targets)
}

fn enclose(g: &Graph, u: &str) -> Res<Graph> {
    let ui = idx(g, u)?;
    let targets = enclose_check(g, ui)?;
    let mut out = g.clone();
    for &w in &targets {
        out = splice(&out, g.label(w), Some(()))?;
        let v2 = out.index(&format!("{}+2", g.label(w))).unwrap();
        let extra = g.get(ui, w).times(Fin(2));
        out.set(ui, v2, extra);
    }
    Ok(out)
}

fn unenclose(g: &Graph, u: &str) -> Res<Graph> {
    let ui = idx(g, u)?;
    let not_found = |why: &str| MoveError::PatternNotFound(format!("no enclosure at `{u}`: {why}"));
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let mut decorated: BTreeSet<usize> = BTreeSet::new();
    let mut candidates: Vec<usize> = g.successors(ui).filter(|&w| w != ui).collect();
    // Targets that are themselves gadget vertices are handled through their base vertex.
    candidates.sort_by_key(|&w| g.label(w).contains('+'));
    for w in candidates {
        if removed.contains(&w) {
            continue;
        }
        let extra = g.get(ui, w).times(Fin(2));
        let names = splice_names(g.label(w));
        if let Some(found) = find_gadget(g, w, &names, Some((ui, extra))) {
            if found.iter().any(|x| removed.contains(x) || *x == ui) {
                continue;
            }
            removed.extend(found);
            decorated.insert(w);
        }
    }
    if decorated.is_empty() {
        return Err(not_found("no decorated target"));
    }
    let keep: Vec<usize> = (0..g.n()).filter(|x| !removed.contains(x)).collect();
    let candidate = rebuild(g, &keep, &[], |x, y| g.get(x, y));
    let redo = enclose(&candidate, u).map_err(|e| not_found(&e.to_string()))?;
    if isomorphism_unguarded(&redo, g).is_none() {
        return Err(not_found("stripped graph does not re-enclose to the input"));
    }
    Ok(candidate)
}

/// Plan undoing `p`, given the graph `g` that `p` applies to.
pub fn invert(g: &Graph, p: &MovePlan) -> Result<MovePlan, MoveError> {
    let after = apply_move(g, p)?;
    let label = |i: usize| g.label(i).to_string();
    let plan = match p {
        MovePlan::OutSplit { w, parts } => MovePlan::OutMerge { w: w.clone(), group: derived(w, parts.len()) },
        MovePlan::InSplit { w, parts } => MovePlan::InMerge { w: w.clone(), group: derived(w, parts.len()) },
        MovePlan::OutMerge { w, group } => {
            let xs = group_indices(g, group)?;
            let parts = xs
                .iter()
                .map(|&x| {
                    let mut part: Profile = (0..g.n())
                        .filter(|y| !xs.contains(y) && !g.get(x, *y).is_zero())
                        .map(|y| (label(y), g.get(x, y)))
                        .collect();
                    let within = g.get(x, xs[0]);
                    if !within.is_zero() {
                        part.push((w.clone(), within));
                    }
                    part
                })
                .collect();
            MovePlan::OutSplit { w: w.clone(), parts }
        }
        MovePlan::InMerge { w, group } => {
            let xs = group_indices(g, group)?;
            let parts = xs
                .iter()
                .map(|&x| {
                    let mut part: Profile = (0..g.n())
                        .filter(|s| !xs.contains(s) && !g.get(*s, x).is_zero())
                        .map(|s| (label(s), g.get(s, x)))
                        .collect();
                    let within = g.get(xs[0], x);
                    if !within.is_zero() {
                        part.push((w.clone(), within));
                    }
                    part
                })
                .collect();
            MovePlan::InSplit { w: w.clone(), parts }
        }
        MovePlan::Redistribute { group, splits, inverse, .. } => {
            let xs = group_indices(g, group)?;
            let splits = splits
                .iter()
                .map(|(s, _)| {
                    let si = g.index(s).unwrap();
                    (s.clone(), xs.iter().map(|&x| g.get(si, x)).collect())
                })
                .collect();
            let within = xs.iter().map(|&x| g.get(xs[0], x)).collect();
            MovePlan::Redistribute { group: group.clone(), splits, within, inverse: !inverse }
        }
        MovePlan::Reduce { w } => {
            let wi = idx(g, w)?;
            let coeffs: Vec<(String, Multiplicity)> = g.predecessors(wi).map(|x| (label(x), g.get(x, wi))).collect();
            if coeffs.iter().any(|(_, k)| k.is_inf()) {
                let exact = g
                    .predecessors(wi)
                    .filter(|&x| g.get(x, wi).is_inf())
                    .all(|x| g.successors(wi).all(|y| g.get(x, y).is_inf()));
                if !exact {
                    return Err(pre(format!("reduction at `{w}` through an infinite bundle cannot be undone exactly")));
                }
            }
            MovePlan::Unreduce { w: w.clone(), source: format!("{w}~"), coeffs }
        }
        MovePlan::Unreduce { w, .. } => MovePlan::Reduce { w: w.clone() },
        MovePlan::RemoveSource { w } => {
            let wi = idx(g, w)?;
            let row = support(g.row(wi)).into_iter().map(|(y, m)| (label(y), m)).collect();
            MovePlan::AddSource { w: w.clone(), row }
        }
        MovePlan::AddSource { w, .. } => MovePlan::RemoveSource { w: w.clone() },
        MovePlan::Splice { u } => MovePlan::Unsplice { u: u.clone() },
        MovePlan::Unsplice { u } => MovePlan::Splice { u: u.clone() },
        MovePlan::Enclose { u } => MovePlan::Unenclose { u: u.clone() },
        MovePlan::Unenclose { u } => MovePlan::Enclose { u: u.clone() },
    };
    debug_assert!(apply_move(&after, &plan).is_ok());
    Ok(plan)
}

/// Expresses a redistribution as an in-amalgamation, an in-split with the same
/// part count, and renames restoring the group's names.
pub fn redistribute_via_in_split(g: &Graph, p: &MovePlan) -> Result<Vec<MovePlan>, MoveError> {
    let MovePlan::Redistribute { group, splits, within, .. } = p else {
        return Err(pre("not a redistribution"));
    };
    check_preconditions(g, p)?;
    let xs = group_indices(g, group)?;
    let w = group[0].clone();
    let listed: BTreeMap<&str, &Vec<Multiplicity>> = splits.iter().map(|(s, v)| (s.as_str(), v)).collect();
    let mut parts: Vec<Profile> = vec![Vec::new(); xs.len()];
    for s in 0..g.n() {
        if xs.contains(&s) {
            continue;
        }
        let col: Vec<Multiplicity> = match listed.get(g.label(s)) {
            Some(v) => (*v).clone(),
            None => xs.iter().map(|&x| g.get(s, x)).collect(),
        };
        for (j, m) in col.into_iter().enumerate() {
            if !m.is_zero() {
                parts[j].push((g.label(s).to_string(), m));
            }
        }
    }
    for (j, m) in within.iter().enumerate() {
        if !m.is_zero() {
            parts[j].push((w.clone(), *m));
        }
    }
    let mut out =
        vec![MovePlan::InMerge { w: w.clone(), group: group.clone() }, MovePlan::InSplit { w: w.clone(), parts }];
    for (j, name) in group.iter().enumerate() {
        out.push(MovePlan::InMerge { w: name.clone(), group: vec![format!("{w}#{}", j + 1)] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;

    fn prof(items: &[(&str, u64)]) -> Profile {
        items.iter().map(|(v, m)| (v.to_string(), Fin(*m))).collect()
    }

    fn intro() -> Graph {
        Graph::from_counts(&["L", "R"], &[&[0, 4], &[1, 0]]).unwrap()
    }

    #[test]
    fn in_split_intro_display() {
        let g = intro();
        let p = MovePlan::InSplit { w: "R".into(), parts: vec![prof(&[("L", 2)]), prof(&[("L", 2)])] };
        let h = apply_move(&g, &p).unwrap();
        assert_eq!(h.labels(), &["L", "R#1", "R#2"]);
        assert_eq!(
            h.rows(),
            vec![vec![Fin(0), Fin(2), Fin(2)], vec![Fin(1), Fin(0), Fin(0)], vec![Fin(1), Fin(0), Fin(0)]]
        );
        let p = MovePlan::InSplit { w: "R".into(), parts: vec![prof(&[("L", 4)]), vec![]] };
        let h = apply_move(&g, &p).unwrap();
        assert_eq!(
            h.rows(),
            vec![vec![Fin(0), Fin(4), Fin(0)], vec![Fin(1), Fin(0), Fin(0)], vec![Fin(1), Fin(0), Fin(0)]]
        );
    }

    #[test]
    fn splice_on_two_loops() {
        let g = g_graph(2, 0);
        assert!(check_preconditions(&g, &MovePlan::Splice { u: "v".into() }).is_ok());
        let h = apply_move(&g, &MovePlan::Splice { u: "v".into() }).unwrap();
        assert_eq!(h.n(), 4);
        let back = apply_move(&h, &MovePlan::Unsplice { u: "v".into() }).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn reduce_rejects_loop() {
        let e = check_preconditions(&g_graph(2, 1), &MovePlan::Reduce { w: "v".into() }).unwrap_err();
        assert!(e.to_string().contains("supports a loop"));
    }

    #[test]
    fn enclose_seed() {
        let g = p_plus_seed();
        let h = apply_move(&g, &MovePlan::Enclose { u: "x1".into() }).unwrap();
        assert_eq!(h.n(), 5);
        assert_eq!(h.get(0, h.index("x2+2").unwrap()), Fin(2));
        let back = apply_move(&h, &MovePlan::Unenclose { u: "x1".into() }).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn name_collision() {
        let g = Graph::from_counts(&["w", "w#1"], &[&[0, 1], &[0, 0]]).unwrap();
        let p = MovePlan::OutSplit { w: "w".into(), parts: vec![prof(&[("w#1", 1)])] };
        assert!(matches!(apply_move(&g, &p), Err(MoveError::NameCollision(_))));
    }
}
