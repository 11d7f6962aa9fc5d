mod common;

use std::cmp::Ordering;

use common::corpus::{corpus, full_cmp};
use nocup::growth::{iterate, iterates_symbolic, leq_e_proxy, ComparatorVerdict, GrowthError, Iterated};
use nocup::honest::{Evaluate, HonestFn};
use nocup::hyperint::HyperInt;
use nocup::machine::Enumeration;
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn compare_agrees_with_full_evaluation() {
    let c = corpus();
    assert_eq!(c.len(), 200);
    for a in &c {
        for b in &c {
            assert_eq!(a.cmp(b), full_cmp(a, b), "{a} vs {b}");
            assert_eq!(a == b, full_cmp(a, b) == Ordering::Equal);
        }
    }
}

#[test]
fn tower_algebra_on_corpus() {
    for v in corpus() {
        assert_eq!(v.exp2(), HyperInt::tower(1, &v));
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(HyperInt::tower(j, &HyperInt::tower(k, &v)), HyperInt::tower(j + k, &v));
            }
        }
        assert_eq!(v.to_string().parse::<HyperInt>().unwrap(), v);
        if let Some(n) = v.to_u64() {
            assert_eq!(HyperInt::pow2(n), v.exp2());
        }
    }
    let c = corpus();
    for a in c.iter().step_by(3) {
        for b in c.iter().step_by(7) {
            assert_eq!(a.cmp(b), a.exp2().cmp(&b.exp2()));
            assert_eq!(HyperInt::max_h(a, b), if a >= b { a.clone() } else { b.clone() });
            assert_eq!(HyperInt::min_h(a, b), if a <= b { a.clone() } else { b.clone() });
        }
    }
}

fn catalog_fns() -> Vec<HonestFn> {
    let m = Enumeration::default();
    ["ID", "SUCC", "POW2", "TOWER_2", "TOWER_3", "TOWERDIAG"]
        .iter()
        .map(|n| HonestFn::named(&m, n).unwrap())
        .collect()
}

fn at_most(a: &HyperInt, b: &Iterated) -> bool {
    match b {
        Iterated::Overflow => true,
        Iterated::Value(v) => a <= v,
    }
}

#[test]
fn leq_monotone_in_kmax() {
    let fs = catalog_fns();
    for f in &fs {
        for g in &fs {
            let mut first = None;
            for k_max in 1..=6 {
                match leq_e_proxy(f, g, k_max, 0..=8).unwrap() {
                    ComparatorVerdict::WitnessK(k) => {
                        assert!(k <= k_max);
                        assert_eq!(*first.get_or_insert(k), k, "{} vs {}", f.label(), g.label());
                    }
                    ComparatorVerdict::NoWitnessUpTo { .. } => assert!(first.is_none()),
                }
            }
        }
    }
}

#[test]
fn leq_transitive_on_catalog_triples() {
    let fs = catalog_fns();
    let core = 0..=4u64;
    let mut checked = 0;
    for f in &fs {
        for g in &fs {
            for h in &fs {
                let (Ok(ComparatorVerdict::WitnessK(j)), Ok(ComparatorVerdict::WitnessK(k))) =
                    (leq_e_proxy(f, g, 6, core.clone()), leq_e_proxy(g, h, 6, core.clone()))
                else {
                    continue;
                };
                // g <= h^k must also hold on the orbit of the core range under g
                let orbit: Vec<u64> = core
                    .clone()
                    .flat_map(|x| iterates_symbolic(g, j, x).unwrap())
                    .filter_map(|i| match i {
                        Iterated::Value(v) => v.to_u64(),
                        Iterated::Overflow => None,
                    })
                    .filter(|y| *y <= 64)
                    .collect();
                let closed = orbit.iter().all(|y| {
                    let gy = g.value_at(*y).unwrap();
                    at_most(&gy, &iterates_symbolic(h, k, *y).unwrap()[k as usize])
                });
                if !closed {
                    continue;
                }
                match leq_e_proxy(f, h, j * k, core.clone()).unwrap() {
                    ComparatorVerdict::WitnessK(w) => assert!(w <= j * k),
                    v => panic!("{} <= {} <= {} but {v}", f.label(), g.label(), h.label()),
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 50, "{checked}");
}

#[test]
fn iterate_examples() {
    let m = Enumeration::default();
    let pow2 = HonestFn::named(&m, "POW2").unwrap();
    assert_eq!(iterate(&pow2, 0, 9).unwrap(), HyperInt::from(9));
    assert_eq!(iterate(&pow2, 2, 3).unwrap(), HyperInt::from(256));
    assert!(matches!(iterate(&pow2, 3, 4), Err(GrowthError::IterateOverflow { .. })));
}

proptest! {
    #[test]
    fn iterate_composes(name in proptest::sample::select(vec!["ID", "SUCC", "POW2", "TOWER_2"]), j in 0u64..4, k in 0u64..4, x in 0u64..6) {
        let f = HonestFn::named(&Enumeration::default(), name).unwrap();
        if let (Ok(inner), Ok(whole)) = (iterate(&f, k, x), iterate(&f, j + k, x)) {
            if let Some(y) = inner.to_u64() {
                prop_assert_eq!(iterate(&f, j, y).unwrap(), whole);
            }
        }
    }

    #[test]
    fn compare_matches_u128(a in any::<u64>(), s in 0u32..64, b in any::<u64>()) {
        let x = HyperInt::Exact(BigUint::from(a) << s);
        let y = HyperInt::from(b);
        prop_assert_eq!(x.cmp(&y), ((a as u128) << s).cmp(&(b as u128)));
    }
}

fn arb_hyper() -> impl Strategy<Value = HyperInt> {
    prop_oneof![
        any::<u64>().prop_map(HyperInt::from),
        proptest::collection::vec(any::<u32>(), 1..8).prop_map(|w| HyperInt::Exact(BigUint::new(w))),
        (1u64..7, 64u64..1 << 20).prop_map(|(h, t)| HyperInt::tower_of(h, BigUint::from(t))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn exp2_strictly_monotone(a in arb_hyper(), b in arb_hyper()) {
        prop_assert_eq!(a.cmp(&b), a.exp2().cmp(&b.exp2()));
    }
}

proptest! {
    #[test]
    fn tower_step_is_exp2(k in 0u64..=6, m in 0u64..=1 << 16) {
        let m = HyperInt::from(m);
        prop_assert_eq!(HyperInt::tower(k + 1, &m), HyperInt::tower(k, &m).exp2());
    }

    #[test]
    fn text_round_trip(a in arb_hyper()) {
        prop_assert_eq!(a.to_string().parse::<HyperInt>().unwrap(), a);
    }

    #[test]
    fn saturation_never_changes_a_comparison(
        h in 1u64..6,
        top in 64u64..1 << 20,
        c in 1u64..1000,
        x in proptest::collection::vec(any::<u32>(), 1..64),
    ) {
        let t = HyperInt::tower_of(h, BigUint::from(top));
        let x = HyperInt::Exact(BigUint::new(x));
        let r = t.mul_small(c);
        if r.saturated {
            prop_assert_eq!(x.cmp(&r.value), x.cmp(&t));
        }
        let s = HyperInt::add_saturating(&t, &x);
        if s.saturated {
            prop_assert_eq!(s.value.cmp(&x), t.cmp(&x));
        }
    }
}
