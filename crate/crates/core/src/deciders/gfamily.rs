//! Move recipes for the single-vertex cores with `c ≥ 2` loops, and the two-vertex pair
//! operations used to reach a unit multiple of the unit class.

use std::fmt;

use super::{glue, merge_sources, DecideError, Res};
use crate::families::g_graph;
use crate::graph::{Fin, Graph, Multiplicity};
use crate::moves::{apply_trace, invert_trace, transport_trace, MovePlan, MoveTrace, Profile, Relation};
use crate::standard_forms::{collect_all_pasts, Run};

/// Longest product of elementary matrices tried when looking for the unimodular pair.
pub const WORD_SEARCH_MAX_LEN: usize = 24;

/// Two-vertex core fed by one source: `d_i = c_i + 1` and `b_ij = a_ji − δ_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairForm {
    pub d: [u64; 2],
    pub b: [[u64; 2]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairOp {
    /// `(E12·D, E12·B)`
    LUpper,
    /// `(E21·D, E21·B)`
    LLower,
    /// `(D, B·E12)`
    RUpper,
    /// `(D, B·E21)`
    RLower,
    AddCol1,
    AddCol2,
}

impl fmt::Display for PairForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.b;
        write!(f, "(({}, {}), [[{a}, {b}], [{c}, {d}]])", self.d[0], self.d[1])
    }
}

impl PairForm {
    /// Graph with vertices `s, v1, v2` realizing the pair.
    pub fn to_graph(&self) -> Graph {
        let [[b11, b12], [b21, b22]] = self.b;
        Graph::from_counts(
            &["s", "v1", "v2"],
            &[&[0, self.d[0] - 1, self.d[1] - 1], &[0, b11 + 1, b21], &[0, b12, b22 + 1]],
        )
        .expect("pair graphs are well formed")
    }

    /// Reads the pair off a graph given the source and the two core vertices.
    pub fn from_graph(g: &Graph, s: usize, v1: usize, v2: usize) -> Option<PairForm> {
        let a = |x: usize, y: usize| g.get(x, y).finite();
        Some(PairForm {
            d: [a(s, v1)? + 1, a(s, v2)? + 1],
            b: [[a(v1, v1)?.checked_sub(1)?, a(v2, v1)?], [a(v1, v2)?, a(v2, v2)?.checked_sub(1)?]],
        })
    }

    /// The pair after `op`, by arithmetic alone.
    pub fn apply(&self, op: PairOp) -> PairForm {
        let [d1, d2] = self.d;
        let [[b11, b12], [b21, b22]] = self.b;
        match op {
            PairOp::LUpper => PairForm { d: [d1 + d2, d2], b: [[b11 + b21, b12 + b22], [b21, b22]] },
            PairOp::LLower => PairForm { d: [d1, d1 + d2], b: [[b11, b12], [b21 + b11, b22 + b12]] },
            PairOp::RUpper => PairForm { d: self.d, b: [[b11, b12 + b11], [b21, b22 + b21]] },
            PairOp::RLower => PairForm { d: self.d, b: [[b11 + b12, b12], [b21 + b22, b22]] },
            PairOp::AddCol1 => PairForm { d: [d1 + b11, d2 + b21], b: self.b },
            PairOp::AddCol2 => PairForm { d: [d1 + b12, d2 + b22], b: self.b },
        }
    }

    /// Some integer `l` has `min D > l + 2 > l > max B`.
    pub fn gap_ok(&self) -> bool {
        let max_b = self.b.iter().flatten().copied().max().unwrap();
        self.d.iter().copied().min().unwrap() > max_b + 3
    }
}

/// A run on a pair-shaped graph with the roles of its three vertices.
struct PairRun {
    run: Run,
    s: String,
    v1: String,
    v2: String,
}

impl PairRun {
    fn new(g: &Graph, s: &str, v1: &str, v2: &str) -> PairRun {
        PairRun { run: Run::new(g), s: s.into(), v1: v1.into(), v2: v2.into() }
    }

    fn idx(&self, name: &str) -> usize {
        self.run.graph.index(name).expect("role vertex present")
    }

    fn adj(&self, x: &str, y: &str) -> u64 {
        self.run.graph.get(self.idx(x), self.idx(y)).finite().expect("pair graphs are finite")
    }

    fn pair(&self) -> Option<PairForm> {
        PairForm::from_graph(&self.run.graph, self.idx(&self.s), self.idx(&self.v1), self.idx(&self.v2))
    }

    fn role(&self, first: bool) -> (String, String) {
        if first {
            (self.v1.clone(), self.v2.clone())
        } else {
            (self.v2.clone(), self.v1.clone())
        }
    }
}

fn profile(entries: &[(&str, u64)]) -> Profile {
    entries.iter().filter(|(_, m)| *m > 0).map(|(v, m)| (v.to_string(), Fin(*m))).collect()
}

fn fail(what: &str) -> DecideError {
    DecideError::Ineligible(what.to_string())
}

/// Row operation: out-split `x` to peel off one edge to `y`, reduce it away, recollect.
fn peel(pr: &mut PairRun, first: bool) -> Res<()> {
    let (x, y) = pr.role(first);
    let (axx, axy) = (pr.adj(&x, &x), pr.adj(&x, &y));
    if axy == 0 || axx == 0 {
        return Err(fail("row operation needs a loop and an edge across"));
    }
    let parts = vec![profile(&[(&x, axx), (&y, axy - 1)]), profile(&[(&y, 1)])];
    pr.run.step(MovePlan::OutSplit { w: x.clone(), parts })?;
    pr.run.step(MovePlan::Reduce { w: format!("{x}#2") })?;
    let s = pr.s.clone();
    pr.run.step(MovePlan::OutMerge { w: s.clone(), group: vec![s, format!("{x}#2~")] })?;
    if first {
        pr.v1 = format!("{x}#1");
    } else {
        pr.v2 = format!("{x}#1");
    }
    Ok(())
}

/// Column operation (and, with `shift`, the column addition to the vector): borrow a copy of
/// `x` from the source, move one past edge onto it, reduce it away, recollect.
fn borrow(pr: &mut PairRun, first: bool, shift: bool) -> Res<()> {
    let (x, y) = pr.role(first);
    let s = pr.s.clone();
    let (cx, cy) = (pr.adj(&s, &x), pr.adj(&s, &y));
    let (axx, axy, ayx) = (pr.adj(&x, &x), pr.adj(&x, &y), pr.adj(&y, &x));
    let need = axx + u64::from(shift);
    if cx <= need || cy <= axy || ayx == 0 {
        return Err(fail("source does not dominate the borrowed row"));
    }
    let parts = vec![profile(&[(&x, axx), (&y, axy)]), profile(&[(&x, cx - axx), (&y, cy - axy)])];
    pr.run.step(MovePlan::OutSplit { w: s.clone(), parts })?;
    let (sa, sb) = (format!("{s}#1"), format!("{s}#2"));
    let mut splits = vec![(y.clone(), vec![Fin(ayx - 1), Fin(1)])];
    if shift {
        splits.push((sb.clone(), vec![Fin(cx - axx - 1), Fin(1)]));
    }
    pr.run.step(MovePlan::Redistribute {
        group: vec![x.clone(), sa.clone()],
        splits,
        within: vec![Fin(axx), Fin(0)],
        inverse: false,
    })?;
    pr.run.step(MovePlan::Reduce { w: sa.clone() })?;
    pr.run.step(MovePlan::OutMerge { w: s, group: vec![sb, format!("{sa}~")] })?;
    Ok(())
}

/// Column addition to the vector: the shifted borrow lands on the column-operated pair,
/// from which the plain borrow is undone.
fn add_column(pr: &mut PairRun, first: bool) -> Res<()> {
    let before = pr.pair().ok_or_else(|| fail("not a pair graph"))?;
    let target = before.apply(if first { PairOp::AddCol1 } else { PairOp::AddCol2 });
    borrow(pr, first, true)?;
    let model = target.to_graph();
    let mut aux = PairRun::new(&model, "s", "v1", "v2");
    borrow(&mut aux, first, false)?;
    let end = apply_trace(&model, &aux.run.trace)?;
    let back = invert_trace(&model, &aux.run.trace)?;
    let roles = [(aux.s.as_str(), pr.s.clone()), ("v1", pr.v1.clone()), ("v2", pr.v2.clone())];
    let sigma: Vec<usize> = (0..end.n())
        .map(|i| {
            let name = &roles.iter().find(|(r, _)| *r == end.label(i)).expect("pair roles").1;
            pr.idx(name)
        })
        .collect();
    let moved = transport_trace(&back, &end, &pr.run.graph, &sigma)?;
    for p in moved.steps {
        pr.run.step(p)?;
    }
    pr.s = source_of(&pr.run.graph)?;
    Ok(())
}

fn source_of(g: &Graph) -> Res<String> {
    (0..g.n())
        .find(|&v| g.col_sum(v) == Fin(0))
        .map(|v| g.label(v).to_string())
        .ok_or_else(|| DecideError::Construction("pair graph lost its source".into()))
}

fn pair_op(pr: &mut PairRun, op: PairOp) -> Res<()> {
    let before = pr.pair().ok_or_else(|| fail("not a pair graph"))?;
    if !before.gap_ok() {
        return Err(fail("gap condition min D > l + 2 > l > max B fails"));
    }
    match op {
        PairOp::LLower => peel(pr, true)?,
        PairOp::LUpper => peel(pr, false)?,
        PairOp::RUpper => borrow(pr, true, false)?,
        PairOp::RLower => borrow(pr, false, false)?,
        PairOp::AddCol1 => add_column(pr, true)?,
        PairOp::AddCol2 => add_column(pr, false)?,
    }
    if pr.pair() != Some(before.apply(op)) {
        return Err(DecideError::Construction(format!("pair operation {op:?} ended at the wrong pair")));
    }
    Ok(())
}

/// Applies `op` to the realization of `p`, returning the new pair and the certifying trace.
pub fn pair_ops(p: &PairForm, op: PairOp) -> Result<(PairForm, MoveTrace), DecideError> {
    let mut pr = PairRun::new(&p.to_graph(), "s", "v1", "v2");
    pair_op(&mut pr, op)?;
    Ok((pr.pair().expect("checked in pair_op"), pr.run.trace))
}

type M2 = [[i64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

const E12: M2 = [[1, 1], [0, 1]];
const E21: M2 = [[1, 0], [1, 1]];

fn factor(mut v: M2) -> String {
    let mut word = Vec::new();
    while v != [[1, 0], [0, 1]] {
        if v[0][0] >= v[1][0] && v[0][1] >= v[1][1] {
            word.push('a');
            v = [[v[0][0] - v[1][0], v[0][1] - v[1][1]], v[1]];
        } else {
            word.push('b');
            v = [v[0], [v[1][0] - v[0][0], v[1][1] - v[0][1]]];
        }
    }
    word.into_iter().collect()
}

/// Words `U`, `V` over `a = E12`, `b = E21` with `U·M = M·V` for `M = [[1,1],[2q,q]]` and
/// `(U·(1, r+1))₂ ≡ target (mod q)`; shortest, then lexicographically least `U`.
pub fn unit_word_search(q: u64, r: u64, target: u64, max_len: usize) -> Option<(String, String)> {
    let q = q as i64;
    let m: M2 = [[1, 1], [2 * q, q]];
    let adj: M2 = [[q, -1], [-2 * q, 1]];
    let ok = |u: &M2| -> Option<String> {
        if (u[1][0] + u[1][1] * (r as i64 + 1)).rem_euclid(q) != target as i64 % q {
            return None;
        }
        let x = mul(&mul(&adj, u), &m);
        if x.iter().flatten().any(|e| e % q != 0) {
            return None;
        }
        let v: M2 = [[-x[0][0] / q, -x[0][1] / q], [-x[1][0] / q, -x[1][1] / q]];
        v.iter().flatten().all(|&e| e >= 0).then(|| factor(v))
    };
    let mut frontier: Vec<(String, M2)> = vec![(String::new(), [[1, 0], [0, 1]])];
    for len in 0..=max_len {
        for (w, u) in &frontier {
            if let Some(v) = ok(u) {
                return Some((w.clone(), v));
            }
        }
        if len == max_len {
            break;
        }
        frontier = frontier
            .iter()
            .flat_map(|(w, u)| [(format!("{w}a"), mul(u, &E12)), (format!("{w}b"), mul(u, &E21))])
            .collect();
    }
    None
}

/// Source label, core label and source weight of a graph shaped like `G(c, n)`.
fn g_roles(g: &Graph) -> Res<(Option<String>, String, u64)> {
    let part = g.core_partition_unchecked().map_err(|e| DecideError::Construction(e.to_string()))?;
    let v = *part.core.iter().next().ok_or_else(|| DecideError::Construction("no core".into()))?;
    let s = part.sources.iter().next().map(|&s| g.label(s).to_string());
    let n = match &s {
        Some(s) => g.get(g.index(s).unwrap(), v).finite().unwrap_or(0),
        None => 0,
    };
    Ok((s, g.label(v).to_string(), n))
}

/// `G(c, n) → G(c, c(n + c − 1))`: split the core into single loops and collect every past.
fn g_up(run: &mut Run, c: u64) -> Res<()> {
    let (_, v, _) = g_roles(&run.graph)?;
    run.step(MovePlan::OutSplit { w: v.clone(), parts: vec![vec![(v.clone(), Fin(1))]; c as usize] })?;
    let group: Vec<usize> = (1..=c).map(|j| run.graph.index(&format!("{v}#{j}")).unwrap()).collect();
    let p = collect_all_pasts(&run.graph, &group);
    run.step(p)?;
    merge_sources(run)
}

/// `G(c, n) → G(c, n + j(c − 1))` for `1 ≤ j ≤ n − c`.
fn g_step(run: &mut Run, c: u64, j: u64) -> Res<()> {
    let (s, v, n) = g_roles(&run.graph)?;
    let s = s.ok_or_else(|| fail("no source"))?;
    if j == 0 || n < c + j {
        return Err(fail("step size exceeds n - c"));
    }
    run.step(MovePlan::OutSplit {
        w: s.clone(),
        parts: vec![vec![(v.clone(), Fin(n - c))], vec![(v.clone(), Fin(c))]],
    })?;
    let (sa, sb) = (format!("{s}#1"), format!("{s}#2"));
    run.step(MovePlan::Redistribute {
        group: vec![v, sb.clone()],
        splits: vec![(sa.clone(), vec![Fin(n - c - j), Fin(j)])],
        within: vec![Fin(c), Fin(0)],
        inverse: false,
    })?;
    run.step(MovePlan::Reduce { w: sb.clone() })?;
    run.step(MovePlan::OutMerge { w: s, group: vec![sa, format!("{sb}~")] })?;
    Ok(())
}

fn lifted(mut n: u64, c: u64) -> u64 {
    while n <= c {
        n = c * (n + c - 1);
    }
    n
}

/// From `G(c, n)` to `G(c, target)` with `target ≡ n (mod c − 1)` and `target ≥ lifted(n)`.
fn climb(run: &mut Run, c: u64, target: u64) -> Res<()> {
    let q = c - 1;
    while g_roles(&run.graph)?.2 <= c {
        g_up(run, c)?;
    }
    loop {
        let n = g_roles(&run.graph)?.2;
        if n == target {
            return Ok(());
        }
        if n > target || !(target - n).is_multiple_of(q) {
            return Err(DecideError::Construction(format!("cannot climb from {n} to {target}")));
        }
        g_step(run, c, (n - c).min((target - n) / q))?;
    }
}

/// From `G(c, n)` to the bare core `[c]`.
fn to_bare_core(run: &mut Run, c: u64) -> Res<()> {
    let (s, v, n) = g_roles(&run.graph)?;
    let Some(s) = s else { return Ok(()) };
    let rest: Multiplicity = Fin(c - 1);
    run.step(MovePlan::OutSplit { w: v.clone(), parts: vec![vec![(v.clone(), Fin(1))], vec![(v.clone(), rest)]] })?;
    let (v1, v2) = (format!("{v}#1"), format!("{v}#2"));
    let mut group = vec![v1.clone()];
    if n >= 2 {
        let unit = vec![(v1.clone(), Fin(1)), (v2.clone(), Fin(1))];
        run.step(MovePlan::OutSplit { w: s.clone(), parts: vec![unit; n as usize] })?;
        group.extend((1..=n).map(|j| format!("{s}#{j}")));
    } else {
        group.push(s);
    }
    run.step(MovePlan::InMerge { w: v1.clone(), group })?;
    run.step(MovePlan::OutMerge { w: v, group: vec![v1, v2] })?;
    Ok(())
}

/// From `G(c, (k1 + k2 + 1)(c − 1) + r)` to the pair `((k1 q + 1, k2 q + r), [[0,1],[q,q−1]])`.
fn open_pair(run: Run, c: u64, k1: u64, k2: u64, r: u64) -> Res<PairRun> {
    let q = c - 1;
    let (s, v, n) = g_roles(&run.graph)?;
    let s = s.ok_or_else(|| fail("no source"))?;
    if n != (k1 + k2 + 1) * q + r || (k1 + k2) * q + r < 2 {
        return Err(DecideError::Construction("source weight does not match the pair".into()));
    }
    let mut pr = PairRun { run, s: format!("{s}#1"), v1: v.clone(), v2: format!("{s}#2") };
    pr.run.step(MovePlan::OutSplit {
        w: s.clone(),
        parts: vec![vec![(v.clone(), Fin((k1 + k2) * q + r - 1))], vec![(v.clone(), Fin(c))]],
    })?;
    pr.run.step(MovePlan::Redistribute {
        group: vec![v, pr.v2.clone()],
        splits: vec![(pr.s.clone(), vec![Fin(k1 * q), Fin(k2 * q + r - 1)])],
        within: vec![Fin(1), Fin(q)],
        inverse: false,
    })?;
    pair_op(&mut pr, PairOp::LLower)?;
    pair_op(&mut pr, PairOp::RLower)?;
    Ok(pr)
}

fn pair_word(pr: &mut PairRun, word: &str, left: bool) -> Res<()> {
    let ops: Vec<PairOp> = if left {
        word.chars().rev().map(|ch| if ch == 'a' { PairOp::LUpper } else { PairOp::LLower }).collect()
    } else {
        word.chars().map(|ch| if ch == 'a' { PairOp::RUpper } else { PairOp::RLower }).collect()
    };
    for op in ops {
        pair_op(pr, op)?;
    }
    Ok(())
}

/// The unit-multiple case of the `10z` construction, when the residues of `n` and `m` differ.
fn unit_route(c: u64, n: u64, m: u64) -> Res<MoveTrace> {
    let q = c - 1;
    let (r, r2) = (n % q, m % q);
    let (uw, vw) = unit_word_search(q, r, (m + 1) % q, super::gfamily::WORD_SEARCH_MAX_LEN)
        .ok_or(DecideError::WordBudget(WORD_SEARCH_MAX_LEN))?;
    let big: M2 = [[1, 1], [2 * q as i64, q as i64]];
    let u = uw.chars().fold([[1, 0], [0, 1]], |acc, ch| mul(&acc, if ch == 'a' { &E12 } else { &E21 }));
    let max_c = mul(&u, &big).iter().flatten().copied().max().unwrap() as u64;
    let k1 = (max_c + 3) / q + 2;
    let mut k2 = 2;
    while k2 * q + r <= q + 3 || (k1 + k2 + 1) * q + r < lifted(n, c) {
        k2 += 1;
    }
    let gn = g_graph(c, n);
    let mut a = Run::new(&gn);
    climb(&mut a, c, (k1 + k2 + 1) * q + r)?;
    let mut pa = open_pair(a, c, k1, k2, r)?;
    pair_word(&mut pa, &uw, true)?;
    let here = pa.pair().expect("pair graph");
    let mut aux_pair = here;
    aux_pair.b = [[1, 1], [2 * q, q]];
    let model = aux_pair.to_graph();
    let mut aux = PairRun::new(&model, "s", "v1", "v2");
    pair_word(&mut aux, &vw, false)?;
    if aux.pair() != Some(here) {
        return Err(DecideError::Construction("left and right products disagree".into()));
    }
    let end = apply_trace(&model, &aux.run.trace)?;
    let back = invert_trace(&model, &aux.run.trace)?;
    let roles = [(aux.s.clone(), pa.s.clone()), (aux.v1.clone(), pa.v1.clone()), (aux.v2.clone(), pa.v2.clone())];
    let sigma: Vec<usize> =
        (0..end.n()).map(|i| pa.idx(&roles.iter().find(|(x, _)| x == end.label(i)).expect("pair roles").1)).collect();
    for p in transport_trace(&back, &end, &pa.run.graph, &sigma)?.steps {
        pa.run.step(p)?;
    }
    pa.s = source_of(&pa.run.graph)?;
    loop {
        let p = pa.pair().expect("pair graph");
        let [d1, d2] = p.d;
        if d1 % q == 1 % q && d2 > d1 + (2 * q).max(q + 3) && d2 + q > lifted(m, c) {
            break;
        }
        pair_op(&mut pa, PairOp::AddCol1)?;
    }
    let [d1, d2] = pa.pair().expect("pair graph").d;
    let (k1b, k2b) = ((d1 - 1) / q, (d2 - d1 - r2) / q);
    let gm = g_graph(c, m);
    let mut b = Run::new(&gm);
    climb(&mut b, c, (k1b + k2b + 1) * q + r2)?;
    let pb = open_pair(b, c, k1b, k2b, r2)?;
    if pb.pair() != pa.pair() {
        return Err(DecideError::Construction("the two pair routes do not meet".into()));
    }
    glue(&gn, &pa.run.trace, None, &gm, &pb.run.trace)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `Some(k)` when `(c + m) = c^k (c + n)` for some `k ≥ 0`.
fn power_gap(c: u64, n: u64, m: u64) -> Option<u32> {
    let (mut a, b) = (c + m, c + n);
    let mut k = 0;
    while a > b {
        if a % c != 0 {
            return None;
        }
        a /= c;
        k += 1;
    }
    (a == b).then_some(k)
}

/// Trace from `G(c, n)` to a graph isomorphic to `G(c, m)` using moves allowed at `r`,
/// or `None` when the family criterion for `r` fails.
pub fn g_family_trace(c: u64, n: u64, m: u64, r: Relation) -> Result<Option<MoveTrace>, DecideError> {
    if c < 2 {
        return Err(fail("need at least two loops"));
    }
    let (gn, gm) = (g_graph(c, n), g_graph(c, m));
    let run_from = |g: &Graph, f: &dyn Fn(&mut Run) -> Res<()>| -> Res<MoveTrace> {
        let mut run = Run::new(g);
        f(&mut run)?;
        Ok(run.trace)
    };
    let q = c - 1;
    match (r.x(), r.y(), r.z()) {
        (false, _, _) => {
            let ta = run_from(&gn, &|run| to_bare_core(run, c))?;
            let tb = run_from(&gm, &|run| to_bare_core(run, c))?;
            Ok(Some(glue(&gn, &ta, None, &gm, &tb)?))
        }
        (true, false, _) => {
            if gcd(n + 1, q) != gcd(m + 1, q) {
                return Ok(None);
            }
            if !(n + q - m % q).is_multiple_of(q) {
                return unit_route(c, n, m).map(Some);
            }
            let top = lifted(n, c).max(lifted(m, c));
            let ta = run_from(&gn, &|run| climb(run, c, top))?;
            let tb = run_from(&gm, &|run| climb(run, c, top))?;
            Ok(Some(glue(&gn, &ta, None, &gm, &tb)?))
        }
        (true, true, true) => {
            let ups = |k: u32| move |run: &mut Run| (0..k).try_for_each(|_| g_up(run, c));
            if let Some(k) = power_gap(c, n, m) {
                let t = run_from(&gn, &ups(k))?;
                Ok(Some(glue(&gn, &t, None, &gm, &MoveTrace::default())?))
            } else if let Some(k) = power_gap(c, m, n) {
                let t = run_from(&gm, &ups(k))?;
                Ok(Some(glue(&gn, &MoveTrace::default(), None, &gm, &t)?))
            } else {
                Ok(None)
            }
        }
        (true, true, false) => Err(fail("relation 110 is not decided")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::isomorphism_unguarded;

    fn ends_at(c: u64, n: u64, m: u64, r: &str) -> Option<bool> {
        let r: Relation = r.parse().unwrap();
        let t = g_family_trace(c, n, m, r).unwrap()?;
        let end = apply_trace(&g_graph(c, n), &t).unwrap();
        assert!(r.le(t.class()) || t.is_empty(), "class {} below {r}", t.class());
        Some(isomorphism_unguarded(&end, &g_graph(c, m)).is_some())
    }

    #[test]
    fn pair_round_trip() {
        let p = PairForm { d: [9, 11], b: [[0, 1], [2, 1]] };
        let g = p.to_graph();
        assert_eq!(PairForm::from_graph(&g, 0, 1, 2), Some(p));
    }

    #[test]
    fn pair_operations_match_arithmetic() {
        let p = PairForm { d: [9, 11], b: [[1, 1], [4, 2]] };
        for op in [PairOp::LUpper, PairOp::LLower, PairOp::RUpper, PairOp::RLower, PairOp::AddCol1, PairOp::AddCol2] {
            let (out, t) = pair_ops(&p, op).unwrap();
            assert_eq!(out, p.apply(op));
            let end = apply_trace(&p.to_graph(), &t).unwrap();
            assert!(isomorphism_unguarded(&end, &out.to_graph()).is_some());
        }
        let tight = PairForm { d: [5, 11], b: [[1, 1], [4, 2]] };
        assert!(pair_ops(&tight, PairOp::LLower).is_err());
    }

    #[test]
    fn residue_and_power_routes() {
        assert_eq!(ends_at(2, 0, 1, "101"), Some(true));
        assert_eq!(ends_at(2, 0, 2, "111"), Some(true));
        assert_eq!(ends_at(3, 0, 1, "111"), None);
        assert_eq!(ends_at(3, 2, 0, "011"), Some(true));
        assert_eq!(ends_at(3, 4, 0, "101"), Some(true));
    }

    #[test]
    fn unit_route_reaches_other_residue() {
        // q = 3: 1 ≡ 2·(0 + 1) - 1, a non-trivial unit.
        assert_eq!(ends_at(4, 0, 1, "101"), Some(true));
    }

    #[test]
    fn unit_words() {
        let (u, v) = unit_word_search(3, 0, 2, WORD_SEARCH_MAX_LEN).unwrap();
        assert_eq!(u, "bbbbab");
        let prod = |w: &str| w.chars().fold([[1, 0], [0, 1]], |acc, ch| mul(&acc, if ch == 'a' { &E12 } else { &E21 }));
        let m: M2 = [[1, 1], [6, 3]];
        assert_eq!(mul(&prod(&u), &m), mul(&m, &prod(&v)));
        assert_eq!(unit_word_search(3, 0, 1, WORD_SEARCH_MAX_LEN), Some((String::new(), String::new())));
    }
}
