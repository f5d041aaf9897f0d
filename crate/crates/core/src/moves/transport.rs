use std::collections::{BTreeMap, BTreeSet};

use super::apply::{apply_move, invert};
use super::{replay, MoveError, MovePlan, MoveTrace, Profile, TraceError};
use crate::graph::Graph;

fn step_err(step: usize, p: &MovePlan, error: MoveError) -> TraceError {
    TraceError { step: step + 1, plan: p.to_string(), error }
}

/// Trace undoing `t`, applicable to `apply_trace(g, t)` and ending at a graph isomorphic to `g`.
///
/// Each raw inverse is computed on the original intermediate graph and renamed onto the
/// graph actually reached, since an inverse split cannot recreate the merged names.
pub fn invert_trace(g: &Graph, t: &MoveTrace) -> Result<MoveTrace, TraceError> {
    let states = replay(g, t)?;
    let mut cur = states.last().expect("replay includes the start").clone();
    // Labels of `states[i + 1]` to labels of `cur`.
    let mut phi: BTreeMap<String, String> = cur.labels().iter().map(|l| (l.clone(), l.clone())).collect();
    let mut steps = Vec::with_capacity(t.len());
    for (i, p) in t.steps.iter().enumerate().rev() {
        let (before, after) = (&states[i], &states[i + 1]);
        let raw = invert(before, p).map_err(|e| step_err(i, p, e))?;
        let q = Renamer { phi: &phi, target: &cur }.plan(&raw).map_err(|e| step_err(i, p, e))?;
        let next = apply_move(&cur, &q).map_err(|e| step_err(i, &q, e))?;
        let k = kept(before, after, p);
        let survivors: BTreeSet<&str> = after.labels()[..k].iter().map(String::as_str).collect();
        let mut removed: Vec<usize> = (0..before.n()).filter(|&x| !survivors.contains(before.label(x))).collect();
        if let MovePlan::OutMerge { group, .. } | MovePlan::InMerge { group, .. } = p {
            removed = group.iter().map(|l| before.index(l).unwrap()).collect();
        }
        let created = &next.labels()[kept(&cur, &next, &q)..];
        let mut map: BTreeMap<String, String> = survivors.iter().map(|&l| (l.to_string(), phi[l].clone())).collect();
        for (&x, c) in removed.iter().zip(created) {
            map.insert(before.label(x).to_string(), c.clone());
        }
        let sound = map.len() == before.n()
            && (0..before.n()).all(|a| {
                (0..before.n()).all(|b| {
                    let (x, y) = (&map[before.label(a)], &map[before.label(b)]);
                    matches!((next.index(x), next.index(y)), (Some(x), Some(y)) if next.get(x, y) == before.get(a, b))
                })
            });
        if !sound {
            let sigma = crate::graph::isomorphism_unguarded(before, &next).ok_or_else(|| {
                step_err(i, p, MoveError::Precondition("inverse step does not restore the graph".into()))
            })?;
            map = (0..before.n()).map(|a| (before.label(a).to_string(), next.label(sigma[a]).to_string())).collect();
        }
        phi = map;
        cur = next;
        steps.push(q);
    }
    Ok(MoveTrace::new(steps))
}

/// Number of leading vertices of the result that are vertices of the input, in order.
fn kept(g: &Graph, after: &Graph, p: &MovePlan) -> usize {
    let n = g.n();
    match p {
        MovePlan::OutSplit { .. } | MovePlan::InSplit { .. } | MovePlan::Reduce { .. } => n - 1,
        MovePlan::Unreduce { .. } | MovePlan::RemoveSource { .. } => n - 1,
        MovePlan::OutMerge { group, .. } | MovePlan::InMerge { group, .. } => n - group.len(),
        MovePlan::Redistribute { .. } | MovePlan::AddSource { .. } => n,
        MovePlan::Splice { .. } | MovePlan::Enclose { .. } => n,
        MovePlan::Unsplice { .. } | MovePlan::Unenclose { .. } => after.n(),
    }
}

struct Renamer<'a> {
    phi: &'a BTreeMap<String, String>,
    target: &'a Graph,
}

impl Renamer<'_> {
    fn v(&self, name: &str) -> Result<String, MoveError> {
        self.phi.get(name).cloned().ok_or_else(|| MoveError::UnknownVertex(name.to_string()))
    }

    fn profile(&self, p: &Profile) -> Result<Profile, MoveError> {
        p.iter().map(|(v, m)| Ok((self.v(v)?, *m))).collect()
    }

    fn group(&self, g: &[String]) -> Result<Vec<String>, MoveError> {
        g.iter().map(|v| self.v(v)).collect()
    }

    /// Name for a vertex created by the step: keep `want` unless it clashes with a
    /// vertex of the target that the step does not remove.
    fn fresh(&self, want: &str, freed: &[String]) -> String {
        let taken = |l: &str| self.target.index(l).is_some() && !freed.iter().any(|f| f == l);
        crate::graph::fresh_among(want, taken)
    }

    fn plan(&self, p: &MovePlan) -> Result<MovePlan, MoveError> {
        Ok(match p {
            MovePlan::OutSplit { w, parts } => MovePlan::OutSplit {
                w: self.v(w)?,
                parts: parts.iter().map(|q| self.profile(q)).collect::<Result<_, _>>()?,
            },
            MovePlan::InSplit { w, parts } => MovePlan::InSplit {
                w: self.v(w)?,
                parts: parts.iter().map(|q| self.profile(q)).collect::<Result<_, _>>()?,
            },
            MovePlan::OutMerge { w, group } | MovePlan::InMerge { w, group } => {
                let mapped = self.group(group)?;
                let name = if w == &group[0] { mapped[0].clone() } else { self.fresh(w, &mapped) };
                if matches!(p, MovePlan::OutMerge { .. }) {
                    MovePlan::OutMerge { w: name, group: mapped }
                } else {
                    MovePlan::InMerge { w: name, group: mapped }
                }
            }
            MovePlan::Redistribute { group, splits, within, inverse } => MovePlan::Redistribute {
                group: self.group(group)?,
                splits: splits.iter().map(|(s, v)| Ok((self.v(s)?, v.clone()))).collect::<Result<_, MoveError>>()?,
                within: within.clone(),
                inverse: *inverse,
            },
            MovePlan::Reduce { w } => MovePlan::Reduce { w: self.v(w)? },
            MovePlan::Unreduce { w, source, coeffs } => {
                let s = self.v(source)?;
                let default = s.strip_suffix('~').unwrap_or(&s).to_string();
                let want = if source.strip_suffix('~') == Some(w.as_str()) { default } else { w.clone() };
                MovePlan::Unreduce {
                    w: self.fresh(&want, std::slice::from_ref(&s)),
                    source: s,
                    coeffs: self.profile(coeffs)?,
                }
            }
            MovePlan::RemoveSource { w } => MovePlan::RemoveSource { w: self.v(w)? },
            MovePlan::AddSource { w, row } => MovePlan::AddSource { w: self.fresh(w, &[]), row: self.profile(row)? },
            MovePlan::Splice { u } => MovePlan::Splice { u: self.v(u)? },
            MovePlan::Unsplice { u } => MovePlan::Unsplice { u: self.v(u)? },
            MovePlan::Enclose { u } => MovePlan::Enclose { u: self.v(u)? },
            MovePlan::Unenclose { u } => MovePlan::Unenclose { u: self.v(u)? },
        })
    }
}

/// Rewrites `t` (applicable to `from`) into a trace applicable to `to`, where `sigma[i]` is
/// the vertex of `to` matching vertex `i` of `from` under an isomorphism.
///
/// Vertices created along the way are matched by position, which is sound because
/// every move keeps surviving vertices in order and appends new ones deterministically.
pub fn transport_trace(t: &MoveTrace, from: &Graph, to: &Graph, sigma: &[usize]) -> Result<MoveTrace, TraceError> {
    let mut phi: BTreeMap<String, String> =
        (0..from.n()).map(|i| (from.label(i).to_string(), to.label(sigma[i]).to_string())).collect();
    let mut g = from.clone();
    let mut h = to.clone();
    let mut out = Vec::with_capacity(t.len());
    for (i, p) in t.steps.iter().enumerate() {
        let q = Renamer { phi: &phi, target: &h }.plan(p).map_err(|e| step_err(i, p, e))?;
        let g2 = apply_move(&g, p).map_err(|e| step_err(i, p, e))?;
        let h2 = apply_move(&h, &q).map_err(|e| step_err(i, &q, e))?;
        let k = kept(&g, &g2, p);
        let k_h = kept(&h, &h2, &q);
        debug_assert_eq!(k, k_h);
        let mut next = BTreeMap::new();
        let survivors: BTreeSet<&str> = g2.labels()[..k].iter().map(String::as_str).collect();
        for name in survivors {
            next.insert(name.to_string(), phi[name].clone());
        }
        for j in k..g2.n() {
            next.insert(g2.label(j).to_string(), h2.label(j).to_string());
        }
        let consistent = (0..g2.n()).all(|a| {
            (0..g2.n()).all(|b| {
                let (x, y) = (&next[g2.label(a)], &next[g2.label(b)]);
                g2.get(a, b) == h2.get(h2.index(x).unwrap(), h2.index(y).unwrap())
            })
        });
        if !consistent {
            return Err(step_err(i, p, MoveError::Precondition("transported step diverges from the original".into())));
        }
        phi = next;
        g = g2;
        h = h2;
        out.push(q);
    }
    Ok(MoveTrace::new(out))
}
