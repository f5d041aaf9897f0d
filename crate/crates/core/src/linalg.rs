//! Exact integer matrices, Smith normal form and finitely generated abelian groups.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Bound on the torsion order for automorphism-orbit comparisons.
pub const TORSION_GUARD: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("torsion order {0} exceeds the guard")]
    GuardExceeded(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_i64_rows(rows: usize, cols: usize, entries: &[Vec<i64>]) -> IntMatrix {
        assert_eq!(entries.len(), rows);
        let mut m = IntMatrix::zeros(rows, cols);
        for (i, r) in entries.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    /// Square or rectangular matrix from a nonempty list of equal-length rows.
    pub fn from_rows(entries: &[Vec<i64>]) -> IntMatrix {
        let cols = entries.first().map_or(0, |r| r.len());
        IntMatrix::from_i64_rows(entries.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_i64().expect("entry fits i64")).collect()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut p = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * p.cols + j;
                        p.data[idx] += a * b;
                    }
                }
            }
        }
        p
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| x.iter().enumerate().map(|(i, xi)| xi * self.get(i, j)).sum()).collect()
    }

    /// Block-diagonal sum `diag(self, other)`.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q * row[src]
    pub fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = self.get(src, j).clone();
            if !s.is_zero() {
                self.data[dst * self.cols + j] += q * s;
            }
        }
    }

    /// col[dst] += q * col[src]
    pub fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = self.get(i, src).clone();
            if !s.is_zero() {
                self.data[i * self.cols + dst] += q * s;
            }
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = -self.get(i, j).clone();
            self.set(i, j, x);
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let x = -self.get(i, j).clone();
            self.set(i, j, x);
        }
    }

    /// Determinant by fraction-free elimination; square matrices only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", r.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Returns `(U, D, V)` with `U·M·V = D`, `U` and `V` unimodular, and `D` diagonal
/// with nonnegative entries forming a divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (r, c) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = d.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..r {
                let q = -d.get(i, t).div_floor(d.get(t, t));
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..c {
                let q = -d.get(t, j).div_floor(d.get(t, t));
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            // Pivot must divide the whole trailing block.
            let p = d.get(t, t).clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !d.get(i, j).is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    d.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    (u, d, v)
}

/// Finitely generated abelian group `Z^free_rank ⊕ Z/d1 ⊕ ... ⊕ Z/dk`, `d1 | d2 | ...`, all `di ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn trivial() -> AbelianGroup {
        AbelianGroup { free_rank: 0, torsion: vec![] }
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            k => parts.push(format!("Z^{k}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Element of an [`AbelianGroup`] in its free ⊕ torsion coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub free: Vec<BigInt>,
    pub torsion: Vec<BigInt>,
}

impl GroupElement {
    /// Order of the element, `None` when infinite.
    pub fn order(&self, group: &AbelianGroup) -> Option<BigInt> {
        if self.free.iter().any(|x| !x.is_zero()) {
            return None;
        }
        Some(self.torsion.iter().zip(&group.torsion).map(|(t, d)| d / t.gcd(d)).fold(BigInt::one(), |a, b| a.lcm(&b)))
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().chain(&self.torsion).all(Zero::is_zero)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let all: Vec<String> = self.free.iter().chain(&self.torsion).map(|x| x.to_string()).collect();
        write!(f, "({})", all.join(", "))
    }
}

/// Cokernel of `x ↦ Mᵀx : Z^rows → Z^cols`, i.e. `Z^cols` modulo the row space of `M`.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub group: AbelianGroup,
    pub ker_rank: usize,
    pub rank: usize,
    cols: usize,
    diag: Vec<BigInt>,
    v: IntMatrix,
}

impl Presentation {
    /// Class of the row vector `x` of length `cols`.
    pub fn project(&self, x: &[BigInt]) -> Result<GroupElement, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        let y = self.v.left_apply(x);
        let mut torsion = Vec::new();
        for (j, d) in self.diag.iter().enumerate().take(self.rank) {
            if !d.is_one() {
                torsion.push(y[j].mod_floor(d));
            }
        }
        let free = y[self.rank..].to_vec();
        Ok(GroupElement { free, torsion })
    }

    pub fn project_i64(&self, x: &[i64]) -> Result<GroupElement, LinalgError> {
        let b: Vec<BigInt> = x.iter().map(|&k| BigInt::from(k)).collect();
        self.project(&b)
    }
}

pub fn presentation(m: &IntMatrix) -> Presentation {
    let (_, d, v) = smith_normal_form(m);
    let k = m.rows.min(m.cols);
    let diag: Vec<BigInt> = (0..k).map(|i| d.get(i, i).clone()).collect();
    let rank = diag.iter().take_while(|x| !x.is_zero()).count();
    let torsion = diag[..rank].iter().filter(|x| !x.is_one()).cloned().collect();
    Presentation {
        group: AbelianGroup { free_rank: m.cols - rank, torsion },
        ker_rank: m.rows - rank,
        rank,
        cols: m.cols,
        diag,
        v,
    }
}

fn prime_powers(mut d: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= d {
        if d.is_multiple_of(p) {
            let mut e = 0;
            while d.is_multiple_of(p) {
                d /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if d > 1 {
        out.push((d, 1));
    }
    out
}

/// Height sequence of an element of a finite p-group given as cyclic components `(x mod p^e, e)`.
fn ulm_sequence(p: u64, comps: &[(u64, u32)]) -> Vec<u32> {
    let mut seq = Vec::new();
    let mut cur: Vec<(u64, u32)> = comps.to_vec();
    loop {
        let h = cur
            .iter()
            .filter(|(x, _)| *x != 0)
            .map(|(x, _)| {
                let (mut x, mut v) = (*x, 0);
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                v
            })
            .min();
        match h {
            None => return seq,
            Some(h) => seq.push(h),
        }
        for (x, e) in cur.iter_mut() {
            *x = (*x * p) % p.pow(*e);
        }
    }
}

/// Orbit label of a torsion element under Aut(T): per-prime height sequences.
fn torsion_orbit(torsion: &[u64], t: &[u64]) -> Vec<(u64, Vec<u32>)> {
    let mut primes: Vec<u64> = torsion.iter().flat_map(|&d| prime_powers(d)).map(|(p, _)| p).collect();
    primes.sort_unstable();
    primes.dedup();
    primes
        .into_iter()
        .map(|p| {
            let comps: Vec<(u64, u32)> = torsion
                .iter()
                .zip(t)
                .filter_map(|(&d, &x)| {
                    prime_powers(d).into_iter().find(|&(q, _)| q == p).map(|(_, e)| (x % p.pow(e), e))
                })
                .collect();
            (p, ulm_sequence(p, &comps))
        })
        .collect()
}

fn to_u64s(xs: &[BigInt]) -> Vec<u64> {
    xs.iter().map(|x| x.to_u64().expect("reduced torsion coordinate")).collect()
}

/// Whether some isomorphism `A → B` carries `a` to `b`.
///
/// Automorphisms of `Z^r ⊕ T` act as `(f, t) ↦ (Af, Cf + αt)`, so for a free part of
/// content `g` the torsion coordinate only matters modulo `gT`.
pub fn pointed_iso(
    a_grp: &AbelianGroup,
    a: &GroupElement,
    b_grp: &AbelianGroup,
    b: &GroupElement,
) -> Result<bool, LinalgError> {
    if a_grp != b_grp {
        return Ok(false);
    }
    let order = a_grp.torsion_order();
    if order > BigInt::from(TORSION_GUARD) {
        return Err(LinalgError::GuardExceeded(order.to_string()));
    }
    let content = |f: &[BigInt]| f.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let (ga, gb) = (content(&a.free), content(&b.free));
    if ga != gb {
        return Ok(false);
    }
    let torsion = to_u64s(&a_grp.torsion);
    let target = torsion_orbit(&torsion, &to_u64s(&a.torsion));
    let tb = to_u64s(&b.torsion);
    if ga.is_zero() {
        return Ok(torsion_orbit(&torsion, &tb) == target);
    }
    // Search tb - g*x over x in T.
    let exponent = a_grp.torsion.last().cloned().unwrap_or_else(BigInt::one);
    let g = ga.mod_floor(&exponent).to_u64().expect("reduced content");
    let mut x = vec![0u64; torsion.len()];
    loop {
        let cand: Vec<u64> = tb
            .iter()
            .zip(&x)
            .zip(&torsion)
            .map(|((&t, &xi), &d)| {
                let gx = (u128::from(g) * u128::from(xi) % u128::from(d)) as u64;
                (t + d - gx) % d
            })
            .collect();
        if torsion_orbit(&torsion, &cand) == target {
            return Ok(true);
        }
        let mut k = 0;
        loop {
            if k == x.len() {
                return Ok(false);
            }
            x[k] += 1;
            if x[k] < torsion[k] {
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

/// Unpointed comparison: isomorphism type of the groups.
pub fn group_iso(a: &AbelianGroup, b: &AbelianGroup) -> bool {
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(torsion: &[i64], free: usize) -> AbelianGroup {
        AbelianGroup { free_rank: free, torsion: torsion.iter().map(|&x| BigInt::from(x)).collect() }
    }

    fn el(free: &[i64], torsion: &[i64]) -> GroupElement {
        GroupElement {
            free: free.iter().map(|&x| BigInt::from(x)).collect(),
            torsion: torsion.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    #[test]
    fn snf_small() {
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let (u, d, v) = smith_normal_form(&m);
        assert_eq!(d, IntMatrix::from_rows(&[vec![1, 0], vec![0, 6]]));
        assert_eq!(u.mul(&m).mul(&v), d);
        let z = IntMatrix::from_rows(&[vec![0]]);
        let (u, d, v) = smith_normal_form(&z);
        assert_eq!((u, d, v), (IntMatrix::identity(1), z.clone(), IntMatrix::identity(1)));
    }

    #[test]
    fn det_matches_cofactor() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 3], vec![0, 4, 1], vec![5, 2, -2]]);
        // 2(-8-2) - (-1)(0-5) + 3(0-20)
        assert_eq!(m.det(), BigInt::from(-85));
    }

    #[test]
    fn cyclic_orbits_follow_gcd() {
        let z99 = g(&[99], 0);
        assert!(pointed_iso(&z99, &el(&[], &[33]), &z99, &el(&[], &[66])).unwrap());
        assert!(!pointed_iso(&z99, &el(&[], &[33]), &z99, &el(&[], &[1])).unwrap());
        let t = g(&[], 0);
        assert!(pointed_iso(&t, &el(&[], &[]), &t, &el(&[], &[])).unwrap());
    }

    #[test]
    fn free_part_absorbs_torsion() {
        // In Z ⊕ Z/4, (1, 0) and (1, 1) are related by the shear (f, t) ↦ (f, t + f).
        let grp = g(&[4], 1);
        assert!(pointed_iso(&grp, &el(&[1], &[0]), &grp, &el(&[1], &[1])).unwrap());
        // Content 2: only 2T = {0, 2} can be absorbed.
        assert!(!pointed_iso(&grp, &el(&[2], &[0]), &grp, &el(&[2], &[1])).unwrap());
        assert!(pointed_iso(&grp, &el(&[2], &[1]), &grp, &el(&[-2], &[3])).unwrap());
    }

    #[test]
    fn guard_trips() {
        let grp = g(&[1_000_003], 0);
        assert!(pointed_iso(&grp, &el(&[], &[1]), &grp, &el(&[], &[2])).is_err());
    }
}
