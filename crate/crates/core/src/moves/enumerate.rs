use std::collections::BTreeSet;

use super::apply::apply_move;
use super::{MoveKind, MovePlan, Profile};
use crate::graph::{Fin, Graph, Multiplicity};

/// Bounds for [`enumerate_applicable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumCaps {
    /// Largest number of parts in a split, and largest merged or redistributed group.
    pub max_parts: usize,
    /// Most plans produced per anchor (a vertex, or a group for merges and redistributions).
    pub max_fanout: Option<usize>,
    /// Also produce inverse plans: merges, unreductions, unsplices and unenclosures.
    /// Added sources are never enumerated since their rows are unbounded.
    pub include_inverse: bool,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps { max_parts: 2, max_fanout: None, include_inverse: false }
    }
}

/// Hard bound on the raw candidates examined per anchor when no fan-out cap is given.
const RAW_LIMIT: usize = 20_000;

/// All compositions of `total` into `n` ordered nonnegative parts.
fn compositions(total: u64, n: usize, out: &mut Vec<Vec<u64>>, limit: usize) {
    fn go(rest: u64, n: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if n == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=rest {
            cur.push(k);
            go(rest - k, n - 1, cur, out, limit);
            cur.pop();
        }
    }
    go(total, n, &mut Vec::new(), out, limit);
}

/// Assignments of a bundle list to `n` parts: finite bundles split by counts, an infinite
/// bundle lands whole in one part. Results are `assign[item][part]`.
fn distribute(items: &[Multiplicity], n: usize, limit: usize) -> Vec<Vec<Vec<Multiplicity>>> {
    let options: Vec<Vec<Vec<Multiplicity>>> = items
        .iter()
        .map(|&m| match m {
            Fin(k) => {
                let mut cs = Vec::new();
                compositions(k, n, &mut cs, limit);
                cs.into_iter().map(|c| c.into_iter().map(Fin).collect()).collect()
            }
            inf => (0..n).map(|j| (0..n).map(|i| if i == j { inf } else { Fin(0) }).collect()).collect(),
        })
        .collect();
    let mut out: Vec<Vec<Vec<Multiplicity>>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::new();
        'outer: for prefix in &out {
            for o in &opts {
                if next.len() >= limit {
                    break 'outer;
                }
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

struct Collector<'a> {
    g: &'a Graph,
    cap: Option<usize>,
    out: Vec<MovePlan>,
}

impl Collector<'_> {
    /// Pushes applicable plans from one anchor, honouring the fan-out cap.
    fn anchor(&mut self, plans: impl IntoIterator<Item = MovePlan>) {
        let mut taken = 0;
        for p in plans {
            if self.cap.is_some_and(|c| taken >= c) {
                break;
            }
            if apply_move(self.g, &p).is_ok() {
                self.out.push(p);
                taken += 1;
            }
        }
    }
}

fn row_items(g: &Graph, w: usize, out: bool) -> Vec<(usize, Multiplicity)> {
    (0..g.n()).map(|y| (y, if out { g.get(w, y) } else { g.get(y, w) })).filter(|(_, m)| !m.is_zero()).collect()
}

/// Splits of the out-row (`out`) or in-column of `w` into `n` parts, deduplicated up to
/// reordering of parts.
fn split_plans(g: &Graph, w: usize, out: bool, max_parts: usize, limit: usize) -> Vec<MovePlan> {
    let items = row_items(g, w, out);
    let mults: Vec<Multiplicity> = items.iter().map(|(_, m)| *m).collect();
    let mut seen: BTreeSet<Vec<Vec<Multiplicity>>> = BTreeSet::new();
    let mut plans = Vec::new();
    for n in 2..=max_parts {
        for assign in distribute(&mults, n, limit) {
            let mut parts: Vec<Vec<Multiplicity>> = (0..n).map(|j| assign.iter().map(|a| a[j]).collect()).collect();
            if out && parts.iter().any(|p| p.iter().all(|m| m.is_zero())) {
                continue;
            }
            parts.sort();
            if !seen.insert(parts.clone()) {
                continue;
            }
            let profiles: Vec<Profile> = parts
                .iter()
                .map(|p| {
                    items
                        .iter()
                        .zip(p)
                        .filter(|(_, m)| !m.is_zero())
                        .map(|((y, _), m)| (g.label(*y).to_string(), *m))
                        .collect()
                })
                .collect();
            let wl = g.label(w).to_string();
            plans.push(if out {
                MovePlan::OutSplit { w: wl, parts: profiles }
            } else {
                MovePlan::InSplit { w: wl, parts: profiles }
            });
            if plans.len() >= limit {
                return plans;
            }
        }
    }
    plans
}

fn subsets(pool: &[usize], min: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn go(pool: &[usize], start: usize, cur: &mut Vec<usize>, min: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() >= min {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            go(pool, i + 1, cur, min, max, out);
            cur.pop();
        }
    }
    go(pool, 0, &mut Vec::new(), min, max, &mut out);
    out
}

fn redistribution_plans(g: &Graph, xs: &[usize], limit: usize) -> Vec<MovePlan> {
    let n = xs.len();
    let sources: Vec<usize> = (0..g.n())
        .filter(|s| !xs.contains(s))
        .filter(|&s| matches!(xs.iter().map(|&x| g.get(s, x)).sum::<Multiplicity>(), Fin(k) if k > 0))
        .collect();
    let mut totals: Vec<Multiplicity> = sources.iter().map(|&s| xs.iter().map(|&x| g.get(s, x)).sum()).collect();
    totals.push(xs.iter().map(|&x| g.get(xs[0], x)).sum());
    let current: Vec<Vec<Multiplicity>> = sources
        .iter()
        .map(|&s| xs.iter().map(|&x| g.get(s, x)).collect())
        .chain(std::iter::once(xs.iter().map(|&x| g.get(xs[0], x)).collect()))
        .collect();
    let mut seen = BTreeSet::new();
    let mut plans = Vec::new();
    for assign in distribute(&totals, n, limit) {
        if assign == current {
            continue;
        }
        // Member j's incoming profile; permuting members gives isomorphic results.
        let mut key: Vec<Vec<Multiplicity>> = (0..n).map(|j| assign.iter().map(|a| a[j]).collect()).collect();
        key.sort();
        if !seen.insert(key) {
            continue;
        }
        let within = assign.last().unwrap().clone();
        let splits = sources.iter().zip(&assign).map(|(&s, a)| (g.label(s).to_string(), a.clone())).collect();
        plans.push(MovePlan::Redistribute {
            group: xs.iter().map(|&x| g.label(x).to_string()).collect(),
            splits,
            within,
            inverse: false,
        });
    }
    plans
}

fn unreduce_plans(g: &Graph, s: usize, limit: usize) -> Vec<MovePlan> {
    let supp: Vec<usize> = g.successors(s).collect();
    let others: Vec<usize> = (0..g.n()).filter(|&x| x != s).collect();
    let bound = |x: usize| -> u64 {
        supp.iter()
            .map(|&y| match (g.get(x, y), g.get(s, y)) {
                (Fin(a), Fin(b)) if b > 0 => a / b,
                (crate::graph::Inf, _) => 1,
                _ => 0,
            })
            .min()
            .unwrap_or(0)
    };
    let bounds: Vec<u64> = others.iter().map(|&x| bound(x)).collect();
    let mut plans = Vec::new();
    let mut k = vec![0u64; others.len()];
    let base = g.label(s).strip_suffix('~').unwrap_or(g.label(s)).to_string();
    let w =
        if base != g.label(s) && g.index(&base).is_none() { base } else { g.fresh_label(&format!("{}^", g.label(s))) };
    loop {
        let mut i = 0;
        while i < k.len() && k[i] == bounds[i] {
            k[i] = 0;
            i += 1;
        }
        if i == k.len() || plans.len() >= limit {
            break;
        }
        k[i] += 1;
        let coeffs =
            others.iter().zip(&k).filter(|(_, &c)| c > 0).map(|(&x, &c)| (g.label(x).to_string(), Fin(c))).collect();
        plans.push(MovePlan::Unreduce { w: w.clone(), source: g.label(s).to_string(), coeffs });
    }
    plans
}

/// All applicable plans of the given kinds within the caps, in a deterministic order,
/// without duplicates up to reordering of parts.
pub fn enumerate_applicable(g: &Graph, kinds: &[MoveKind], caps: &EnumCaps) -> Vec<MovePlan> {
    let limit = caps.max_fanout.map_or(RAW_LIMIT, |c| c.max(1) * 64).min(RAW_LIMIT);
    let mut col = Collector { g, cap: caps.max_fanout, out: Vec::new() };
    let n = g.n();
    let label = |i: usize| g.label(i).to_string();
    let groups = |min: usize| subsets(&(0..n).collect::<Vec<_>>(), min, caps.max_parts.max(min));
    for kind in MoveKind::ALL.into_iter().filter(|k| kinds.contains(k)) {
        match kind {
            MoveKind::O => {
                for w in 0..n {
                    col.anchor(split_plans(g, w, true, caps.max_parts, limit));
                }
                if caps.include_inverse {
                    for xs in groups(2) {
                        let group: Vec<String> = xs.iter().map(|&x| label(x)).collect();
                        col.anchor([MovePlan::OutMerge { w: group[0].clone(), group }]);
                    }
                }
            }
            MoveKind::IMinus => {
                for w in (0..n).filter(|&w| g.is_regular(w)) {
                    col.anchor(split_plans(g, w, false, caps.max_parts, limit));
                }
                if caps.include_inverse {
                    for xs in groups(2) {
                        let group: Vec<String> = xs.iter().map(|&x| label(x)).collect();
                        col.anchor([MovePlan::InMerge { w: group[0].clone(), group }]);
                    }
                }
            }
            MoveKind::IPlus => {
                for xs in groups(2) {
                    let same = xs.iter().all(|&x| g.row(x) == g.row(xs[0]) && g.is_regular(x));
                    if same {
                        col.anchor(redistribution_plans(g, &xs, limit));
                    }
                }
            }
            MoveKind::RPlus => {
                for w in 0..n {
                    col.anchor([MovePlan::Reduce { w: label(w) }]);
                }
                if caps.include_inverse {
                    for s in (0..n).filter(|&s| g.col_sum(s).is_zero() && g.is_regular(s)) {
                        col.anchor(unreduce_plans(g, s, limit));
                    }
                }
            }
            MoveKind::S => {
                for w in 0..n {
                    col.anchor([MovePlan::RemoveSource { w: label(w) }]);
                }
            }
            MoveKind::CPlus => {
                for u in 0..n {
                    col.anchor([MovePlan::Splice { u: label(u) }]);
                }
                if caps.include_inverse {
                    for u in 0..n {
                        col.anchor([MovePlan::Unsplice { u: label(u) }]);
                    }
                }
            }
            MoveKind::PPlus => {
                for u in 0..n {
                    col.anchor([MovePlan::Enclose { u: label(u) }]);
                }
                if caps.include_inverse {
                    for u in 0..n {
                        col.anchor([MovePlan::Unenclose { u: label(u) }]);
                    }
                }
            }
        }
    }
    col.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::f_graph;

    #[test]
    fn single_source() {
        let plans = enumerate_applicable(&f_graph(&[1, 1]), &[MoveKind::S], &EnumCaps::default());
        assert_eq!(plans, vec![MovePlan::RemoveSource { w: "t2".into() }]);
    }

    #[test]
    fn loop_blocks_reduction() {
        let g = Graph::from_counts(&["a"], &[&[1]]).unwrap();
        assert!(enumerate_applicable(&g, &[MoveKind::RPlus], &EnumCaps::default()).is_empty());
    }

    #[test]
    fn compositions_count() {
        let mut v = Vec::new();
        compositions(4, 3, &mut v, usize::MAX);
        assert_eq!(v.len(), 15);
    }
}
