//! K-theoretic invariants, temperature, gauge invariants by core shape, and a distinguisher.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::graph::{Fin, Graph, GraphError, Inf};
use crate::linalg::{pointed_iso, presentation, AbelianGroup, GroupElement, IntMatrix, LinalgError};
use crate::moves::Relation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantError {
    #[error("graph has singular vertices; Bowen-Franks data needs an essential finite graph")]
    SingularVertices,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Pointed K0 and the rank of K1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KData {
    pub k0: AbelianGroup,
    pub unit: GroupElement,
    pub k1_rank: usize,
}

impl KData {
    pub fn unit_order(&self) -> Option<BigInt> {
        self.unit.order(&self.k0)
    }
}

pub fn k_data(g: &Graph) -> KData {
    let (_, bb, _) = g.b_matrices();
    let p = presentation(&bb);
    let unit = p.project_i64(&vec![1; g.n()]).expect("unit vector has one entry per vertex");
    KData { k0: p.group.clone(), unit, k1_rank: p.ker_rank }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BowenFranks {
    pub group: AbelianGroup,
    pub det_sign: i8,
}

/// `coker(I - A)` and the sign of `det(I - A)`; all vertices must be regular.
pub fn bowen_franks(g: &Graph) -> Result<BowenFranks, InvariantError> {
    if (0..g.n()).any(|v| !g.is_regular(v)) {
        return Err(InvariantError::SingularVertices);
    }
    let n = g.n();
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| {
                    let a = i64::try_from(g.get(u, v).finite().unwrap()).expect("edge count exceeds i64");
                    i64::from(u == v) - a
                })
                .collect()
        })
        .collect();
    let m = IntMatrix::from_rows(&rows);
    let det = m.det();
    let det_sign = if det.is_zero() {
        0
    } else if det.is_positive() {
        1
    } else {
        -1
    };
    Ok(BowenFranks { group: presentation(&m).group, det_sign })
}

/// −2 when some cycle has no exit, −1 when there is no cycle, otherwise
/// `rank K0 − rank K1` (the number of infinite emitters).
pub fn temperature(g: &Graph) -> Result<i64, InvariantError> {
    if !g.is_gauge_simple() {
        return Err(GraphError::NotGaugeSimple.into());
    }
    let cyc = g.return_path_vertices();
    if cyc.is_empty() {
        return Ok(-1);
    }
    if cyc.iter().all(|&v| g.row_sum(v) == Fin(1)) {
        return Ok(-2);
    }
    let k = k_data(g);
    Ok(k.k0.free_rank as i64 - k.k1_rank as i64)
}

/// Gauge-equivariant data determined by the shape of the core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaugeFamilyInvariant {
    /// Core is a sink; entry `i` counts paths of length `i + 1` ending there.
    FTuple(Vec<BigUint>),
    /// Core is a cycle without exits; per-phase weights, compared up to rotation.
    ECyclic(Vec<BigUint>),
    /// Core is one vertex with `c ≥ 2` loops; the unit sits at `(c + n)` in `Z[1/c]`.
    GPair { c: u64, n: BigUint },
    /// Core is one vertex with infinitely many loops; entry counts as for [`FTuple`](Self::FTuple).
    HTuple(Vec<BigUint>),
}

fn fmt_tuple(v: &[BigUint]) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", items.join(","))
}

impl fmt::Display for GaugeFamilyInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeFamilyInvariant::FTuple(v) => write!(f, "FTuple{}", fmt_tuple(v)),
            GaugeFamilyInvariant::ECyclic(v) => write!(f, "ECyclic{}", fmt_tuple(v)),
            GaugeFamilyInvariant::GPair { c, n } => write!(f, "GPair({c},{n})"),
            GaugeFamilyInvariant::HTuple(v) => write!(f, "HTuple{}", fmt_tuple(v)),
        }
    }
}

fn strip_factor(mut v: BigUint, c: u64) -> BigUint {
    let c = BigUint::from(c);
    while !v.is_zero() && (&v % &c).is_zero() {
        v /= &c;
    }
    v
}

fn is_rotation(a: &[BigUint], b: &[BigUint]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|s| (0..a.len()).all(|i| a[(i + s) % a.len()] == b[i])))
}

impl GaugeFamilyInvariant {
    /// Whether the data agrees as required by an equivalence with the unit fixed.
    pub fn agrees_pointed(&self, other: &GaugeFamilyInvariant) -> Option<bool> {
        use GaugeFamilyInvariant::*;
        match (self, other) {
            (FTuple(a), FTuple(b)) | (HTuple(a), HTuple(b)) => Some(a == b),
            (ECyclic(a), ECyclic(b)) => Some(is_rotation(a, b)),
            (GPair { c, n }, GPair { c: d, n: m }) if c == d => {
                Some(strip_factor(BigUint::from(*c) + n, *c) == strip_factor(BigUint::from(*c) + m, *c))
            }
            _ => None,
        }
    }

    /// Whether the data agrees as required by a stable equivalence.
    pub fn agrees_stable(&self, other: &GaugeFamilyInvariant) -> Option<bool> {
        use GaugeFamilyInvariant::*;
        match (self, other) {
            (FTuple(a), FTuple(b)) | (ECyclic(a), ECyclic(b)) => Some(a.len() == b.len()),
            (GPair { c, .. }, GPair { c: d, .. }) if c == d => Some(true),
            (HTuple(_), HTuple(_)) => Some(true),
            _ => None,
        }
    }
}

/// `counts[ℓ-1][c]`: number of paths of length `ℓ` that start outside the core and
/// first meet it at `c`.
pub fn core_entry_counts(g: &Graph, core: &BTreeSet<usize>) -> Vec<Vec<BigUint>> {
    let n = g.n();
    let outside: Vec<usize> = (0..n).filter(|v| !core.contains(v)).collect();
    let big = |v: usize, w: usize| BigUint::from(g.get(v, w).finite().expect("finite edges outside the core"));
    let mut w: Vec<BigUint> = vec![BigUint::zero(); n];
    for &x in &outside {
        w[x] = BigUint::one();
    }
    let mut out = Vec::new();
    for _ in 0..n {
        if outside.iter().all(|&x| w[x].is_zero()) {
            break;
        }
        let mut hit = vec![BigUint::zero(); n];
        let mut next = vec![BigUint::zero(); n];
        for &x in &outside {
            if w[x].is_zero() {
                continue;
            }
            for y in g.successors(x) {
                let add = &w[x] * big(x, y);
                if core.contains(&y) {
                    hit[y] += add;
                } else {
                    next[y] += add;
                }
            }
        }
        out.push(hit);
        w = next;
    }
    while out.last().is_some_and(|h| h.iter().all(Zero::is_zero)) {
        out.pop();
    }
    out
}

/// Gauge invariant for gauge-simple graphs whose core is a sink, a cycle without exits,
/// or a single vertex with at least two loops.
pub fn gauge_family_invariant(g: &Graph) -> Option<GaugeFamilyInvariant> {
    let part = g.core_partition().ok()?;
    let core = &part.core;
    let counts = core_entry_counts(g, core);
    let single = |counts: &[Vec<BigUint>], z: usize| counts.iter().map(|h| h[z].clone()).collect::<Vec<_>>();
    if core.len() == 1 {
        let z = *core.iter().next().unwrap();
        match g.get(z, z) {
            Fin(0) => return Some(GaugeFamilyInvariant::FTuple(single(&counts, z))),
            Inf => return Some(GaugeFamilyInvariant::HTuple(single(&counts, z))),
            Fin(c) if c >= 2 => {
                let p = single(&counts, z);
                let n = match p.len() {
                    0 => BigUint::zero(),
                    1 => p[0].clone(),
                    len => {
                        let cb = BigUint::from(c);
                        let mut v = cb.pow(len as u32);
                        for (i, pi) in p.iter().enumerate() {
                            v += pi * cb.pow((len - 1 - i) as u32);
                        }
                        let mut v = strip_factor(v, c);
                        while v < cb {
                            v *= &cb;
                        }
                        v - cb
                    }
                };
                return Some(GaugeFamilyInvariant::GPair { c, n });
            }
            _ => {}
        }
    }
    if core.iter().all(|&v| g.row_sum(v) == Fin(1)) {
        let k = core.len();
        let mut order = vec![*core.iter().next().unwrap()];
        while order.len() < k {
            let last = *order.last().unwrap();
            order.push(g.successors(last).next()?);
        }
        let mut e = vec![BigUint::one(); k];
        for (l, hit) in counts.iter().enumerate() {
            for (i, &v) in order.iter().enumerate() {
                let j = (i + k * (l + 1) - (l + 1)) % k;
                e[j] += &hit[v];
            }
        }
        return Some(GaugeFamilyInvariant::ECyclic(e));
    }
    None
}

/// A named invariant separating two graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub invariant: String,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

fn witness(invariant: &str, detail: String) -> Option<Witness> {
    Some(Witness { invariant: invariant.to_string(), detail })
}

fn gpair_detail(c: u64, n: &BigUint, m: &BigUint) -> String {
    let (a, b) = (BigUint::from(c) + m, BigUint::from(c) + n);
    let g = a.gcd(&b);
    format!("{}/{} not a power of {c}", a / &g, b / &g)
}

/// A witness that `g` and `h` are not `r`-equivalent, if an implemented invariant separates them.
/// Absence means unknown.
pub fn distinguish(g: &Graph, h: &Graph, r: Relation) -> Option<Witness> {
    let (kg, kh) = (k_data(g), k_data(h));
    if kg.k0 != kh.k0 {
        return witness("K0", format!("{} vs {}", kg.k0, kh.k0));
    }
    if r.x() && pointed_iso(&kg.k0, &kg.unit, &kh.k0, &kh.unit) == Ok(false) {
        return witness("pointed K0", format!("({}, {}) vs ({}, {})", kg.k0, kg.unit, kh.k0, kh.unit));
    }
    if kg.k1_rank != kh.k1_rank {
        return witness("K1 rank", format!("{} vs {}", kg.k1_rank, kh.k1_rank));
    }
    if let (Ok(tg), Ok(th)) = (temperature(g), temperature(h)) {
        if tg != th {
            return witness("temperature", format!("{tg} vs {th}"));
        }
    }
    if r.y() {
        if let (Some(a), Some(b)) = (gauge_family_invariant(g), gauge_family_invariant(h)) {
            let agrees = if r.x() { a.agrees_pointed(&b) } else { a.agrees_stable(&b) };
            if agrees == Some(false) {
                use GaugeFamilyInvariant::*;
                return match (&a, &b, r.x()) {
                    (GPair { c, n }, GPair { n: m, .. }, true) => witness("GPair", gpair_detail(*c, n, m)),
                    (FTuple(p), FTuple(q), false) | (ECyclic(p), ECyclic(q), false) => {
                        let name = if matches!(a, FTuple(_)) { "FTuple length" } else { "ECyclic length" };
                        witness(name, format!("{} vs {}", p.len(), q.len()))
                    }
                    (ECyclic(_), _, true) => witness("ECyclic", format!("{a} vs {b} are not rotations")),
                    _ => {
                        let name = a.to_string();
                        let name = &name[..name.find('(').unwrap_or(name.len())];
                        witness(name, format!("{a} vs {b}"))
                    }
                };
            }
        }
    }
    None
}

/// `gcd` of the unit with the order of a finite cyclic K0; it determines the unit's orbit.
pub fn unit_gcd(k: &KData) -> Option<BigInt> {
    if k.k0.free_rank != 0 || k.k0.torsion.len() != 1 {
        return None;
    }
    Some(k.unit.torsion[0].gcd(&k.k0.torsion[0]))
}

/// Torsion order as a machine integer when it fits.
pub fn torsion_order_u64(k: &KData) -> Option<u64> {
    k.k0.torsion_order().to_u64()
}
