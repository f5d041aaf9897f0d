//! Exhaustive agreement between the loop-family trace builder and the arithmetic criteria.

use graphmoves::deciders::{g_family_trace, DecideError};
use graphmoves::families::g_graph;
use graphmoves::moves::Relation;
use graphmoves::search::verify_trace;

fn is_power_ratio(c: u64, n: u64, m: u64) -> bool {
    let (lo, hi) = ((c + n).min(c + m), (c + n).max(c + m));
    let mut p = lo;
    while p < hi {
        p *= c;
    }
    p == hi
}

fn differ_by_unit(q: u64, a: u64, b: u64) -> bool {
    (1..=q.max(1)).any(|x| num_integer::Integer::gcd(&x, &q) == 1 && (x * a) % q == b % q)
}

fn check(r: &str, predicate: impl Fn(u64, u64, u64) -> bool) {
    let rel: Relation = r.parse().unwrap();
    for c in 2..=4u64 {
        for n in 0..=12 {
            for m in 0..=12 {
                let expect = predicate(c, n, m);
                match g_family_trace(c, n, m, rel) {
                    Ok(Some(t)) => {
                        assert!(expect, "G({c},{n}) ~ G({c},{m}) at {r} should be absent");
                        let v = verify_trace(&g_graph(c, n), &t, &g_graph(c, m), rel);
                        assert!(v.ok, "G({c},{n}) -> G({c},{m}) at {r}: {v}");
                    }
                    Ok(None) => assert!(!expect, "G({c},{n}) ~ G({c},{m}) at {r} missing"),
                    Err(DecideError::WordBudget(_)) => assert!(expect),
                    Err(e) => panic!("G({c},{n}) -> G({c},{m}) at {r}: {e}"),
                }
            }
        }
    }
}

#[test]
fn full_relation_matches_power_of_c() {
    check("111", is_power_ratio);
}

#[test]
fn unital_relation_matches_unit_multiples() {
    check("101", |c, n, m| differ_by_unit(c - 1, (n + 1) % (c - 1), (m + 1) % (c - 1)));
}

#[test]
fn stable_relation_always_connects() {
    check("011", |_, _, _| true);
}
