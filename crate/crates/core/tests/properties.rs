mod common;

use graphmoves::deciders::{splice_witness, SpliceKind};
use graphmoves::graph::{are_isomorphic, Fin, Graph, Inf, Multiplicity};
use graphmoves::invariants::k_data;
use graphmoves::linalg::{group_iso, pointed_iso, smith_normal_form, IntMatrix};
use graphmoves::moves::{
    apply_move, apply_trace, check_preconditions, enumerate_applicable, invert, invert_trace,
    redistribute_via_in_split, EnumCaps, MoveKind, MovePlan, MoveTrace, Relation,
};
use graphmoves::search::canonical_key;
use graphmoves::standard_forms::{reduce, reduce_011_counted, verify_form, FormKind};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn iso(a: &Graph, b: &Graph) -> bool {
    matches!(are_isomorphic(a, b, 14), Ok(Some(_)))
}

fn graph_from(n: usize, cells: &[u8], inf_at: Option<usize>) -> Graph {
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut rows: Vec<Vec<Multiplicity>> =
        (0..n).map(|u| (0..n).map(|v| Fin(u64::from(cells[u * n + v]))).collect()).collect();
    if let Some(k) = inf_at {
        rows[(k / n) % n][k % n] = Inf;
    }
    Graph::new(labels, rows).unwrap()
}

fn small_graph(max_n: usize, max_m: u8) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..=max_m, n * n).prop_map(move |cells| graph_from(n, &cells, None))
    })
}

fn small_graph_maybe_inf(max_n: usize, max_m: u8) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(move |n| {
        (prop::collection::vec(0..=max_m, n * n), prop::option::weighted(0.2, 0..n * n))
            .prop_map(move |(cells, inf)| graph_from(n, &cells, inf))
    })
}

/// Graph whose first two vertices share a row, so redistributions apply.
fn twin_graph(max_n: usize, max_m: u8) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..=max_m, n * n).prop_map(move |mut cells| {
            let first: Vec<u8> = cells[..n].to_vec();
            cells[n..2 * n].copy_from_slice(&first);
            graph_from(n, &cells, None)
        })
    })
}

fn caps() -> EnumCaps {
    EnumCaps { max_parts: 2, max_fanout: Some(4), include_inverse: true }
}

fn form_budget(f: FormKind) -> Relation {
    match f {
        FormKind::Std111 => "111",
        FormKind::Std011 | FormKind::NoSources => "011",
        FormKind::Std101 => "101",
        FormKind::Std001 => "001",
    }
    .parse()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn inverse_moves_undo(g in small_graph_maybe_inf(4, 2), pick in any::<prop::sample::Index>()) {
        let plans = enumerate_applicable(&g, &MoveKind::ALL, &caps());
        prop_assume!(!plans.is_empty());
        let p = &plans[pick.index(plans.len())];
        let h = apply_move(&g, p).unwrap();
        let back = apply_move(&h, &invert(&g, p).unwrap()).unwrap();
        prop_assert!(iso(&g, &back), "`{}` not undone", p);
    }

    #[test]
    fn inverted_traces_undo(g in small_graph(4, 2), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let mut t = MoveTrace::default();
        let mut cur = g.clone();
        for pick in picks {
            let plans = enumerate_applicable(&cur, &MoveKind::ALL, &caps());
            if plans.is_empty() || cur.n() > 8 {
                break;
            }
            let p = plans[pick.index(plans.len())].clone();
            cur = apply_move(&cur, &p).unwrap();
            t.push(p);
        }
        let inv = invert_trace(&g, &t).unwrap();
        let back = apply_trace(&cur, &inv).unwrap();
        prop_assert!(iso(&g, &back), "trace\n{}inverse\n{}", t.to_script(), inv.to_script());
    }

    #[test]
    fn redistribution_factors_through_in_splits(g in twin_graph(4, 3), pick in any::<prop::sample::Index>()) {
        let plans = enumerate_applicable(&g, &[MoveKind::IPlus], &caps());
        prop_assume!(!plans.is_empty());
        let p = &plans[pick.index(plans.len())];
        let direct = apply_move(&g, p).unwrap();
        let steps = redistribute_via_in_split(&g, p).unwrap();
        prop_assert!(steps.iter().all(|s| s.kind() == MoveKind::IMinus));
        let via = apply_trace(&g, &MoveTrace::new(steps)).unwrap();
        prop_assert!(iso(&direct, &via));
    }

    #[test]
    fn moves_respect_their_class(g in small_graph_maybe_inf(5, 3), pick in any::<prop::sample::Index>()) {
        let plans = enumerate_applicable(&g, &MoveKind::ALL, &caps());
        prop_assume!(!plans.is_empty());
        let p = &plans[pick.index(plans.len())];
        let (a, b) = (k_data(&g), k_data(&apply_move(&g, p).unwrap()));
        prop_assert!(group_iso(&a.k0, &b.k0) && a.k1_rank == b.k1_rank);
        if p.kind().invariance_class().x() {
            prop_assert!(pointed_iso(&a.k0, &a.unit, &b.k0, &b.unit).unwrap());
        }
    }

    #[test]
    fn snf_is_a_certified_diagonalisation(
        (r, c, cells) in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(-9i64..=9, r * c)))
    ) {
        let rows: Vec<Vec<i64>> = cells.chunks(c).map(<[i64]>::to_vec).collect();
        let m = IntMatrix::from_rows(&rows);
        let (u, d, v) = smith_normal_form(&m);
        prop_assert_eq!(u.mul(&m).mul(&v), d.clone());
        prop_assert!(u.det().abs().is_one() && v.det().abs().is_one());
        for i in 1..r.min(c) {
            let (a, b) = (d.get(i - 1, i - 1), d.get(i, i));
            prop_assert!(b.is_zero() || (!a.is_zero() && (b % a).is_zero()));
        }
    }

    #[test]
    fn canonical_keys_ignore_vertex_order(g in small_graph_maybe_inf(5, 3), perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
        let order: Vec<usize> = perm.into_iter().filter(|&i| i < g.n()).collect();
        let h = g.permuted(&order);
        prop_assert_eq!(canonical_key(&g).unwrap(), canonical_key(&h).unwrap());
    }

    #[test]
    fn standard_forms_are_sound_and_idempotent(g in small_graph(4, 2)) {
        prop_assume!(g.is_gauge_simple());
        for f in FormKind::ALL {
            let Ok((end, t)) = reduce(&g, f) else { continue };
            prop_assert!(verify_form(&end, f).is_empty(), "{} fails {:?}", f, verify_form(&end, f));
            prop_assert!(form_budget(f).le(t.class()), "{} used class {}", f, t.class());
            prop_assert_eq!(&apply_trace(&g, &t).unwrap(), &end);
            let (again, t2) = reduce(&end, f).unwrap();
            prop_assert!(iso(&end, &again));
            prop_assert!(t2.is_empty() || t2.class() == "111".parse().unwrap(), "{} not idempotent:\n{}", f, t2.to_script());
        }
        if let Ok((_, _, counter)) = reduce_011_counted(&g) {
            prop_assert!(counter.windows(2).all(|w| w[1] < w[0]), "counter {:?}", counter);
        }
    }

    #[test]
    fn splice_witnesses_hold(g in small_graph(5, 3), pick in any::<prop::sample::Index>()) {
        let u = g.label(pick.index(g.n())).to_string();
        for (kind, p) in [(SpliceKind::CPlus, MovePlan::Splice { u: u.clone() }), (SpliceKind::PPlus, MovePlan::Enclose { u: u.clone() })] {
            if check_preconditions(&g, &p).is_err() {
                continue;
            }
            let g2 = apply_move(&g, &p).unwrap();
            let w = splice_witness(&g, &g2, kind, &u).unwrap();
            prop_assert!(w.identity_holds && w.unit_preserved && w.recheck());
        }
    }
}
