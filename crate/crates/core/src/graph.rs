//! Directed multigraphs with possibly infinite edge bundles.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;

use crate::linalg::IntMatrix;

/// Default vertex bound for exhaustive isomorphism checks.
pub const ISO_GUARD: usize = 10;

/// Edge count between two vertices. `Inf` absorbs under addition and is maximal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Multiplicity {
    Fin(u64),
    Inf,
}

pub use Multiplicity::{Fin, Inf};

impl Multiplicity {
    pub const ZERO: Multiplicity = Fin(0);

    pub fn is_zero(self) -> bool {
        self == Fin(0)
    }

    pub fn is_inf(self) -> bool {
        self == Inf
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(k) => Some(k),
            Inf => None,
        }
    }

    /// Product used by composition of edge bundles; `0 * Inf = 0`.
    pub fn times(self, other: Multiplicity) -> Multiplicity {
        match (self, other) {
            (Fin(0), _) | (_, Fin(0)) => Fin(0),
            (Fin(a), Fin(b)) => Fin(a.checked_mul(b).expect("edge count overflow")),
            _ => Inf,
        }
    }

    /// `self - other` when both are finite and the result is nonnegative.
    pub fn checked_sub(self, other: Multiplicity) -> Option<Multiplicity> {
        match (self, other) {
            (Fin(a), Fin(b)) => a.checked_sub(b).map(Fin),
            _ => None,
        }
    }
}

impl Add for Multiplicity {
    type Output = Multiplicity;
    fn add(self, rhs: Multiplicity) -> Multiplicity {
        match (self, rhs) {
            (Fin(a), Fin(b)) => Fin(a.checked_add(b).expect("edge count overflow")),
            _ => Inf,
        }
    }
}

impl std::iter::Sum for Multiplicity {
    fn sum<I: Iterator<Item = Multiplicity>>(iter: I) -> Multiplicity {
        iter.fold(Fin(0), |a, b| a + b)
    }
}

impl From<u64> for Multiplicity {
    fn from(k: u64) -> Self {
        Fin(k)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(k) => write!(f, "{k}"),
            Inf => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Multiplicity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "inf" {
            return Ok(Inf);
        }
        s.parse::<u64>().map(Fin).map_err(|_| format!("bad multiplicity `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexClass {
    Sink,
    InfiniteEmitter,
    RegularSource,
    RegularInternal,
}

impl VertexClass {
    pub fn is_singular(self) -> bool {
        matches!(self, VertexClass::Sink | VertexClass::InfiniteEmitter)
    }

    pub fn is_regular(self) -> bool {
        !self.is_singular()
    }
}

/// Vertex indices split into core, transitional and source vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorePartition {
    pub core: BTreeSet<usize>,
    pub transitional: BTreeSet<usize>,
    pub sources: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("adjacency matrix is not square: {rows} rows for {labels} labels")]
    NonSquare { rows: usize, labels: usize },
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("graph is not gauge-simple")]
    NotGaugeSimple,
    #[error("return-path vertices do not form a single component")]
    MultipleCores,
    #[error("graph has {size} vertices, exceeding the guard of {guard}")]
    GuardExceeded { size: usize, guard: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite graph stored as a dense adjacency matrix in vertex-declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    name: String,
    labels: Vec<String>,
    adj: Vec<Multiplicity>,
}

impl Graph {
    pub fn new(labels: Vec<String>, entries: Vec<Vec<Multiplicity>>) -> Result<Graph, GraphError> {
        let n = labels.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(GraphError::NonSquare { rows: entries.len(), labels: n });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !valid_label(l) {
                return Err(GraphError::Parse { line: 0, msg: format!("invalid label `{l}`") });
            }
            if !seen.insert(l.as_str()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Graph { name: "G".into(), labels, adj: entries.into_iter().flatten().collect() })
    }

    /// Convenience constructor over string labels and finite counts.
    pub fn from_counts(labels: &[&str], entries: &[&[u64]]) -> Result<Graph, GraphError> {
        Graph::new(
            labels.iter().map(|s| s.to_string()).collect(),
            entries.iter().map(|r| r.iter().map(|&k| Fin(k)).collect()).collect(),
        )
    }

    pub fn named(mut self, name: &str) -> Graph {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn require(&self, label: &str) -> Result<usize, GraphError> {
        self.index(label).ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    pub fn get(&self, u: usize, v: usize) -> Multiplicity {
        self.adj[u * self.n() + v]
    }

    pub fn set(&mut self, u: usize, v: usize, m: Multiplicity) {
        let n = self.n();
        self.adj[u * n + v] = m;
    }

    pub fn row(&self, u: usize) -> &[Multiplicity] {
        let n = self.n();
        &self.adj[u * n..(u + 1) * n]
    }

    pub fn col(&self, v: usize) -> Vec<Multiplicity> {
        (0..self.n()).map(|u| self.get(u, v)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Multiplicity>> {
        (0..self.n()).map(|u| self.row(u).to_vec()).collect()
    }

    pub fn row_sum(&self, u: usize) -> Multiplicity {
        self.row(u).iter().copied().sum()
    }

    pub fn col_sum(&self, v: usize) -> Multiplicity {
        (0..self.n()).map(|u| self.get(u, v)).sum()
    }

    pub fn class_of(&self, v: usize) -> VertexClass {
        match self.row_sum(v) {
            Fin(0) => VertexClass::Sink,
            Inf => VertexClass::InfiniteEmitter,
            _ if self.col_sum(v).is_zero() => VertexClass::RegularSource,
            _ => VertexClass::RegularInternal,
        }
    }

    pub fn classify_vertex(&self, label: &str) -> Result<VertexClass, GraphError> {
        Ok(self.class_of(self.require(label)?))
    }

    pub fn is_regular(&self, v: usize) -> bool {
        self.class_of(v).is_regular()
    }

    pub fn regular_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_regular(v)).collect()
    }

    pub fn has_infinite_entry(&self) -> bool {
        self.adj.iter().any(|m| m.is_inf())
    }

    /// Out-neighbours of `u` (targets of at least one edge).
    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&v| !self.get(u, v).is_zero())
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&u| !self.get(u, v).is_zero())
    }

    /// `reach[u][v]` iff there is a path of length ≥ 1 from u to v.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        let mut r: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| !self.get(u, v).is_zero()).collect()).collect();
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    pub fn return_path_vertices(&self) -> BTreeSet<usize> {
        let r = self.reachability();
        (0..self.n()).filter(|&v| r[v][v]).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.return_path_vertices().is_empty()
    }

    /// Returns `(B, Bbullet, regular rows)`. `B` entries are `None` where the adjacency entry is infinite.
    pub fn b_matrices(&self) -> (Vec<Vec<Option<i64>>>, IntMatrix, Vec<usize>) {
        let n = self.n();
        let b: Vec<Vec<Option<i64>>> = (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| {
                        self.get(u, v)
                            .finite()
                            .map(|k| i64::try_from(k).expect("edge count exceeds i64") - i64::from(u == v))
                    })
                    .collect()
            })
            .collect();
        let regular = self.regular_vertices();
        let rows: Vec<Vec<i64>> =
            regular.iter().map(|&u| b[u].iter().map(|e| e.expect("regular rows are finite")).collect()).collect();
        (b, IntMatrix::from_i64_rows(regular.len(), n, &rows), regular)
    }

    /// Smallest hereditary saturated set containing `seed`.
    pub fn hereditary_saturated_closure(&self, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let n = self.n();
        let mut inside = vec![false; n];
        let mut stack: Vec<usize> = seed.iter().copied().collect();
        for &v in seed {
            inside[v] = true;
        }
        loop {
            while let Some(u) = stack.pop() {
                for v in self.successors(u) {
                    if !inside[v] {
                        inside[v] = true;
                        stack.push(v);
                    }
                }
            }
            let mut grew = false;
            for v in 0..n {
                if !inside[v] && self.is_regular(v) && self.successors(v).all(|w| inside[w]) {
                    inside[v] = true;
                    stack.push(v);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        (0..n).filter(|&v| inside[v]).collect()
    }

    /// Every nonempty hereditary saturated set contains the closure of one of its vertices,
    /// so the graph is gauge-simple iff every single-vertex closure is everything.
    pub fn is_gauge_simple(&self) -> bool {
        (0..self.n()).all(|v| self.hereditary_saturated_closure(&BTreeSet::from([v])).len() == self.n())
    }

    pub fn core_partition(&self) -> Result<CorePartition, GraphError> {
        if !self.is_gauge_simple() {
            return Err(GraphError::NotGaugeSimple);
        }
        self.core_partition_unchecked()
    }

    /// Core partition without the gauge-simplicity precondition check.
    pub fn core_partition_unchecked(&self) -> Result<CorePartition, GraphError> {
        let r = self.reachability();
        let n = self.n();
        let mut core: BTreeSet<usize> = (0..n).filter(|&v| r[v][v]).collect();
        if core.is_empty() {
            let sinks: Vec<usize> = (0..n).filter(|&v| self.row_sum(v).is_zero()).collect();
            if sinks.len() != 1 {
                return Err(GraphError::MultipleCores);
            }
            core.insert(sinks[0]);
        } else {
            let first = *core.iter().next().unwrap();
            if core.iter().any(|&v| !(r[first][v] && r[v][first])) {
                return Err(GraphError::MultipleCores);
            }
        }
        let mut transitional = BTreeSet::new();
        let mut sources = BTreeSet::new();
        for v in 0..n {
            if core.contains(&v) {
                continue;
            }
            if self.col_sum(v).is_zero() {
                sources.insert(v);
            } else {
                transitional.insert(v);
            }
        }
        Ok(CorePartition { core, transitional, sources })
    }

    /// Relabels vertices by position; new name list must have the same length.
    pub fn with_labels(&self, labels: Vec<String>) -> Result<Graph, GraphError> {
        Graph::new(labels, self.rows()).map(|g| g.named(&self.name))
    }

    /// Graph whose vertex `i` is vertex `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Graph {
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let rows = order.iter().map(|&u| order.iter().map(|&v| self.get(u, v)).collect()).collect();
        Graph::new(labels, rows).expect("permutation keeps validity").named(&self.name)
    }

    /// Text rendering in the line format read by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("graph {}\nvertices {}\n", self.name, self.labels.join(" "));
        for u in 0..self.n() {
            s.push_str("row ");
            s.push_str(&self.labels[u]);
            for v in 0..self.n() {
                s.push(' ');
                s.push_str(&self.get(u, v).to_string());
            }
            s.push('\n');
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut graphs = Graph::parse_many(text)?;
        match graphs.len() {
            1 => Ok(graphs.pop().unwrap()),
            0 => Err(GraphError::Parse { line: 0, msg: "no graph found".into() }),
            k => Err(GraphError::Parse { line: 0, msg: format!("expected one graph, found {k}") }),
        }
    }

    /// Parses consecutive `graph ... end` blocks; a `#` opening a token starts a comment.
    pub fn parse_many(text: &str) -> Result<Vec<Graph>, GraphError> {
        let err = |line: usize, msg: String| GraphError::Parse { line, msg };
        let mut out = Vec::new();
        let mut name: Option<String> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<Multiplicity>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap();
            match (head, name.is_some(), labels.is_some()) {
                ("graph", false, _) => {
                    let nm: Vec<&str> = toks.collect();
                    if nm.len() != 1 {
                        return Err(err(line_no, "expected `graph <name>`".into()));
                    }
                    name = Some(nm[0].to_string());
                }
                ("vertices", true, false) => {
                    let ls: Vec<String> = toks.map(str::to_string).collect();
                    if ls.is_empty() {
                        return Err(err(line_no, "empty vertex list".into()));
                    }
                    labels = Some(ls);
                }
                ("row", true, true) => {
                    let ls = labels.as_ref().unwrap();
                    let lbl = toks.next().ok_or_else(|| err(line_no, "row without label".into()))?;
                    let expect = ls.get(rows.len()).ok_or_else(|| err(line_no, format!("extra row `{lbl}`")))?;
                    if lbl != expect {
                        return Err(err(line_no, format!("expected row `{expect}`, found `{lbl}`")));
                    }
                    let entries: Vec<Multiplicity> =
                        toks.map(|t| t.parse().map_err(|m| err(line_no, m))).collect::<Result<_, _>>()?;
                    if entries.len() != ls.len() {
                        return Err(err(
                            line_no,
                            format!("row `{lbl}` has {} entries, expected {}", entries.len(), ls.len()),
                        ));
                    }
                    rows.push(entries);
                }
                ("end", true, true) => {
                    let ls = labels.take().unwrap();
                    if rows.len() != ls.len() {
                        return Err(err(line_no, format!("{} rows for {} vertices", rows.len(), ls.len())));
                    }
                    let g = Graph::new(ls, std::mem::take(&mut rows)).map_err(|e| match e {
                        GraphError::Parse { msg, .. } => err(line_no, msg),
                        other => err(line_no, other.to_string()),
                    })?;
                    out.push(g.named(&name.take().unwrap()));
                }
                _ => return Err(err(line_no, format!("unexpected `{head}`"))),
            }
        }
        if name.is_some() {
            return Err(err(text.lines().count(), "missing `end`".into()));
        }
        Ok(out)
    }

    /// A label not yet used, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        fresh_among(base, |l| self.index(l).is_some())
    }
}

pub(crate) fn fresh_among(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}'{k}")).find(|c| !taken(c)).unwrap()
}

/// `#` starts a comment unless it sits inside a vertex name such as `w#1`.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut prev_ws = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_ws {
            return &line[..i];
        }
        prev_ws = c.is_whitespace();
    }
    line
}

/// Labels must be single tokens free of the script metacharacters.
pub fn valid_label(l: &str) -> bool {
    !l.is_empty() && !l.chars().any(|c| c.is_whitespace() || "{}[]|:;,@".contains(c)) && l != "-" && !l.starts_with('#')
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn profile(g: &Graph, v: usize) -> (Multiplicity, Vec<Multiplicity>, Vec<Multiplicity>) {
    let mut out: Vec<Multiplicity> = g.row(v).to_vec();
    let mut inn = g.col(v);
    out.sort();
    inn.sort();
    (g.get(v, v), out, inn)
}

/// Lexicographically least bijection `σ` (as `σ[i]` = image of vertex `i`) with
/// `adj_H(σu, σv) = adj_G(u, v)`, if one exists.
pub fn are_isomorphic(g: &Graph, h: &Graph, guard: usize) -> Result<Option<Vec<usize>>, GraphError> {
    for x in [g, h] {
        if x.n() > guard {
            return Err(GraphError::GuardExceeded { size: x.n(), guard });
        }
    }
    Ok(isomorphism_unguarded(g, h))
}

pub(crate) fn isomorphism_unguarded(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    let n = g.n();
    if n != h.n() {
        return None;
    }
    let pg: Vec<_> = (0..n).map(|v| profile(g, v)).collect();
    let ph: Vec<_> = (0..n).map(|v| profile(h, v)).collect();
    let mut a = pg.clone();
    let mut b = ph.clone();
    a.sort();
    b.sort();
    if a != b {
        return None;
    }
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        i: usize,
        g: &Graph,
        h: &Graph,
        pg: &[(Multiplicity, Vec<Multiplicity>, Vec<Multiplicity>)],
        ph: &[(Multiplicity, Vec<Multiplicity>, Vec<Multiplicity>)],
        sigma: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == g.n() {
            return true;
        }
        for j in 0..h.n() {
            if used[j] || pg[i] != ph[j] {
                continue;
            }
            let ok = (0..i).all(|k| g.get(i, k) == h.get(j, sigma[k]) && g.get(k, i) == h.get(sigma[k], j));
            if !ok {
                continue;
            }
            sigma[i] = j;
            used[j] = true;
            if extend(i + 1, g, h, pg, ph, sigma, used) {
                return true;
            }
            used[j] = false;
        }
        sigma[i] = usize::MAX;
        false
    }
    if extend(0, g, h, &pg, &ph, &mut sigma, &mut used) {
        Some(sigma)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_names_survive_a_text_round_trip() {
        let g = Graph::from_counts(&["v#1#2", "v"], &[&[0, 1], &[0, 2]]).unwrap();
        let text = format!("# split result\n{}", g.to_text().replace("end", "end # done"));
        assert_eq!(Graph::parse(&text).unwrap(), g.named("G"));
    }

    #[test]
    fn multiplicity_arithmetic() {
        assert_eq!(Inf + Fin(3), Inf);
        assert_eq!(Fin(2) + Fin(3), Fin(5));
        assert!(Fin(u64::MAX) < Inf);
        assert_eq!(Fin(0).times(Inf), Fin(0));
        assert_eq!(Fin(2).times(Inf), Inf);
    }

    #[test]
    fn text_roundtrip() {
        let g =
            Graph::new(vec!["a".into(), "b".into()], vec![vec![Fin(0), Fin(2)], vec![Inf, Fin(1)]]).unwrap().named("t");
        let text = g.to_text();
        assert_eq!(text, "graph t\nvertices a b\nrow a 0 2\nrow b inf 1\nend\n");
        assert_eq!(Graph::parse(&text).unwrap(), g);
    }

    #[test]
    fn parser_rejects_bad_rows() {
        assert!(Graph::parse("graph x\nvertices a b\nrow b 0 0\nrow a 0 0\nend\n").is_err());
        assert!(Graph::parse("graph x\nvertices a\nrow a 0\nrow a 0\nend\n").is_err());
        assert!(Graph::parse("graph x\nvertices a b\nrow a 0 0\nend\n").is_err());
        assert!(Graph::parse("graph x\nvertices a a\nrow a 0 0\nrow a 0 0\nend\n").is_err());
    }

    #[test]
    fn build_errors() {
        assert_eq!(Graph::new(vec![], vec![]), Err(GraphError::Empty));
        assert!(matches!(Graph::from_counts(&["a", "b"], &[&[0, 1]]), Err(GraphError::NonSquare { .. })));
        assert!(matches!(Graph::from_counts(&["a", "a"], &[&[0, 1], &[0, 0]]), Err(GraphError::DuplicateLabel(_))));
    }

    #[test]
    fn two_loops_not_gauge_simple() {
        let g = Graph::from_counts(&["a", "b"], &[&[1, 0], &[0, 1]]).unwrap();
        assert!(!g.is_gauge_simple());
        assert_eq!(g.core_partition(), Err(GraphError::NotGaugeSimple));
    }
}
