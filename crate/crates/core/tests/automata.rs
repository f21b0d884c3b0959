use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treeltl::automata::{automaton_from_json, automaton_to_json, check_run, product, ConstraintAutomaton, Transition};
use treeltl::logic::{lasso_accepted, LassoWord};
use treeltl::oracle::{random_automaton, random_guard, random_word, Profile};
use treeltl::order_types::Configuration;
use treeltl::tree::{insert_gap, prefix_leq, ConstantSet, Word};

fn automaton(seed: u64) -> ConstraintAutomaton {
    random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), &Profile::default())
}

fn words(seed: u64, k: usize) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| random_word(&mut rng, 3, &[1, 2, 3])).collect()
}

/// A random automaton over the given constants.
fn partner(seed: u64, constants: &ConstantSet) -> ConstraintAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = random_automaton(&mut rng, &Profile::default());
    let transitions = shape
        .transitions
        .iter()
        .map(|t| Transition { guard: random_guard(&mut rng, shape.dim, constants, 3), ..t.clone() })
        .collect();
    ConstraintAutomaton::new(shape.dim, constants.clone(), shape.states, shape.initial, shape.finals, transitions)
        .unwrap()
}

proptest! {
    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let a = automaton(seed);
        prop_assert_eq!(automaton_from_json(&automaton_to_json(&a)).unwrap(), a);
    }

    /// Guards only see the order structure: relabeling by a gap insertion
    /// away from the constants keeps every verdict.
    #[test]
    fn guards_are_invariant_under_gaps(seed in any::<u64>(), m in 1usize..3, pick in 0usize..4, cut in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Profile::default();
        let a = random_automaton(&mut rng, &p);
        let g = random_guard(&mut rng, a.dim, &a.constants, 3);
        let vals = words(seed ^ 1, 2 * a.dim);
        let w = &vals[pick % vals.len()];
        let u = w.prefix(cut.min(w.len()));
        if !a.constants.is_fixed(&u) {
            let moved: Vec<Word> = vals.iter().map(|v| insert_gap(&u, m, v)).collect();
            let n = a.dim;
            prop_assert_eq!(
                g.eval_words(&vals[..n], &vals[n..], &a.constants),
                g.eval_words(&moved[..n], &moved[n..], &a.constants)
            );
        }
    }

    /// The product accepts a lasso iff both factors do.
    #[test]
    fn product_is_intersection(seed in any::<u64>(), len in 1usize..3) {
        let a = automaton(seed);
        let b = partner(seed ^ 0x55, &a.constants);
        let ab = product(&a, &b).unwrap();
        let dim = a.dim.max(b.dim);
        let vals = words(seed ^ 2, dim * (len + 1));
        let tuples: Vec<Vec<Word>> = vals.chunks(dim).map(|c| c.to_vec()).collect();
        let w = LassoWord::periodic(tuples[..1].to_vec(), tuples[1..].to_vec());
        let both = lasso_accepted(&a, &w).unwrap() && lasso_accepted(&b, &w).unwrap();
        prop_assert_eq!(lasso_accepted(&ab, &w).unwrap(), both);
    }

    #[test]
    fn run_checks_follow_guards(seed in any::<u64>()) {
        let a = automaton(seed);
        let vals = words(seed ^ 3, 2 * a.dim);
        let (x, y) = (vals[..a.dim].to_vec(), vals[a.dim..].to_vec());
        for t in &a.transitions {
            let run = [Configuration::new(t.from, x.clone()), Configuration::new(t.to, y.clone())];
            if t.guard.eval_words(&x, &y, &a.constants) {
                prop_assert!(check_run(&a, &run));
            }
        }
    }
}

#[test]
fn prefix_guard_reads_values() {
    let c = ConstantSet::default();
    let a = automaton_from_json(
        r#"{"dim":1,"states":["q"],"initial":["q"],"final":["q"],
            "transitions":[{"from":"q","to":"q","guard":"pref(x1,y1)"}]}"#,
    )
    .unwrap();
    let w = |s: &str| vec![s.parse::<Word>().unwrap()];
    assert!(check_run(&a, &[Configuration::new(0, w("1")), Configuration::new(0, w("1.2"))]));
    assert!(!check_run(&a, &[Configuration::new(0, w("2")), Configuration::new(0, w("1.2"))]));
    assert!(prefix_leq(&w("1")[0], &w("1.2")[0]));
    assert_eq!(a.constants, c);
}
