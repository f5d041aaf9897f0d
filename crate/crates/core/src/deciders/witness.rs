//! Explicit unimodular pairs `(U, V)` showing that the two splice-type moves preserve the
//! filtered K-theory with its unit class.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::DecideError;
use crate::graph::Graph;
use crate::linalg::{presentation, IntMatrix};
use crate::moves::{apply_move, MovePlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpliceKind {
    /// Splice gadget at a vertex with two return paths.
    CPlus,
    /// Enclosure of a single-loop vertex: a gadget at each of its exits.
    PPlus,
}

#[derive(Clone, Debug)]
pub struct SpliceWitness {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// `B•` of the graph after the move.
    pub bdot: IntMatrix,
    /// `B•` of the graph before the move, padded with `−I` on the new vertices.
    pub embedded: IntMatrix,
    pub identity_holds: bool,
    pub unit_preserved: bool,
}

impl SpliceWitness {
    /// Recomputes `U·B•·V = embedded` from the stored matrices.
    pub fn recheck(&self) -> bool {
        self.u.det().abs().is_one() && self.v.det().is_one() && self.u.mul(&self.bdot).mul(&self.v) == self.embedded
    }
}

fn ineligible(why: String) -> DecideError {
    DecideError::Ineligible(why)
}

/// Builds and checks the witness for `g2 = kind at u (g)`.
pub fn splice_witness(g: &Graph, g2: &Graph, kind: SpliceKind, u: &str) -> Result<SpliceWitness, DecideError> {
    let plan = match kind {
        SpliceKind::CPlus => MovePlan::Splice { u: u.into() },
        SpliceKind::PPlus => MovePlan::Enclose { u: u.into() },
    };
    let expected = apply_move(g, &plan).map_err(|e| ineligible(e.to_string()))?;
    if &expected != g2 {
        return Err(ineligible(format!("second graph is not the result of `{plan}`")));
    }
    let ui = g.index(u).expect("checked by the move");
    let (_, bdot, regular2) = g2.b_matrices();
    let (_, b, regular) = g.b_matrices();
    let (n, n2) = (g.n(), g2.n());
    let extra = n2 - n;
    let row_of = |x: usize| regular2.iter().position(|&r| r == x).expect("gadget and base rows are regular");
    let col = |name: String| g2.index(&name).expect("gadget vertex present");
    let one = BigInt::one();
    let mut um = IntMatrix::identity(regular2.len());
    let mut vm = IntMatrix::identity(n2);
    let targets: Vec<usize> = match kind {
        SpliceKind::CPlus => vec![ui],
        SpliceKind::PPlus => g.successors(ui).filter(|&w| w != ui).collect(),
    };
    for &w in &targets {
        let wl = g.label(w);
        let (c1, c2, c3) = (col(format!("{wl}+1")), col(format!("{wl}+2")), col(format!("{wl}+3")));
        let (r1, r2, rw) = (row_of(c1), row_of(c2), row_of(w));
        match kind {
            SpliceKind::CPlus => {
                um.add_row(rw, r2, &-&one);
                um.swap_rows(r1, r2);
                um.negate_row(r1);
                um.negate_row(r2);
                vm.add_col(w, c2, &-&one);
                vm.add_col(w, c3, &one);
            }
            SpliceKind::PPlus => {
                let a = BigInt::from(g.get(ui, w).finite().expect("regular rows are finite"));
                um.add_row(rw, r2, &-&one);
                um.add_row(row_of(ui), r1, &-(a * BigInt::from(2)));
                um.negate_row(r1);
                um.negate_row(r2);
                um.swap_rows(r1, r2);
                vm.add_col(w, c3, &one);
                vm.add_col(w, c2, &-&one);
            }
        }
    }
    if kind == SpliceKind::PPlus {
        um.negate_row(row_of(ui));
    }
    let mut embedded = IntMatrix::zeros(regular2.len(), n2);
    for (i, _) in regular.iter().enumerate() {
        for j in 0..n {
            embedded.set(i, j, b.get(i, j).clone());
        }
    }
    for k in 0..extra {
        embedded.set(regular.len() + k, n + k, -&one);
    }
    let mut w = SpliceWitness { u: um, v: vm, bdot, embedded, identity_holds: false, unit_preserved: false };
    w.identity_holds = w.recheck();
    // The unit class: the all-ones row vector, pushed through V, must land on the old unit.
    let ones: Vec<BigInt> = vec![one.clone(); n2];
    let pushed: Vec<BigInt> = (0..n2).map(|j| (0..n2).map(|i| &ones[i] * w.v.get(i, j)).sum::<BigInt>()).collect();
    let diff: Vec<BigInt> = pushed.iter().enumerate().map(|(j, x)| if j < n { x - &one } else { x.clone() }).collect();
    w.unit_preserved = presentation(&w.embedded).project(&diff).map(|e| e.is_zero()).unwrap_or(false);
    Ok(w)
}
