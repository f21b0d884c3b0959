use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treeltl::automata::{automaton_from_json, RunType};
use treeltl::engine::{check_certificate, is_empty};
use treeltl::oracle::{bounded_emptiness, random_automaton, random_instances, PairTable, Profile, SearchBounds};
use treeltl::order_types::{compose_pairs, OrderType};
use treeltl::tree::{ConstantSet, Word};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Found lassos are genuine certificates, and the engine agrees.
    #[test]
    fn lassos_are_certificates(seed in any::<u64>()) {
        let a = random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), &Profile::default());
        let b = SearchBounds { max_word_length: 2, ..SearchBounds::default() };
        if let Some(c) = bounded_emptiness(&a, &b) {
            prop_assert!(check_certificate(&a, &c).is_ok());
            prop_assert_eq!(c.loop_run.first(), c.loop_run.last());
            prop_assert!(is_empty(&a).unwrap().nonempty);
        }
    }
}

#[test]
fn instance_streams_are_reproducible() {
    let a: Vec<_> = random_instances(11, Profile::default()).take(20).collect();
    let b: Vec<_> = random_instances(11, Profile::default()).take(20).collect();
    assert_eq!(a, b);
    assert!(a.iter().all(|x| x.dim <= 2 && x.states.len() <= 3));
}

#[test]
fn strict_descent_has_no_lasso() {
    let a = automaton_from_json(
        r#"{"dim":1,"states":["q"],"initial":["q"],"final":["q"],
            "transitions":[{"from":"q","to":"q","guard":"pref(y1,x1) & !eq(x1,y1)"}]}"#,
    )
    .unwrap();
    for len in 1..=4 {
        let b = SearchBounds { max_word_length: len, ..SearchBounds::default() };
        assert!(bounded_emptiness(&a, &b).is_none(), "length {len}");
    }
}

/// With a constant, witnessed compositions are still found symbolically.
#[test]
fn witnessed_compositions_with_a_constant() {
    let c = ConstantSet::closed(vec![("a".into(), "2".parse::<Word>().unwrap())]).unwrap();
    let table = PairTable::new(1, &SearchBounds::default(), &c);
    let types = table.witnessed().to_vec();
    let rt = |pi: &OrderType| RunType { from: 0, pi: pi.clone(), to: 0 };
    for p1 in &types {
        for p2 in types.iter().filter(|p| p.first() == p1.second()) {
            let brute: BTreeSet<OrderType> = table.compose(&rt(p1), &rt(p2)).into_iter().map(|t| t.pi).collect();
            let alg: BTreeSet<OrderType> = compose_pairs(p1, p2).unwrap().into_iter().map(|k| k.outer).collect();
            assert!(brute.is_subset(&alg), "{p1} · {p2}");
        }
    }
}
