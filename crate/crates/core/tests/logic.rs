use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeltl::automata::{ConstraintAutomaton, Rel};
use treeltl::logic::{
    eliminate_exponents, eval_formula, is_nnf, lasso_accepted, mc, parse_formula, sat, to_nnf, translate, Branching,
    Formula, LTerm, LassoWord,
};
use treeltl::oracle::{bounded_emptiness, random_constants, random_formula, random_word, Profile, SearchBounds};
use treeltl::tree::{ConstantSet, Word};

fn instance(seed: u64, depth: usize) -> (Formula, ConstantSet, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_constants(&mut rng, &Profile::default());
    let dim = rng.gen_range(1..=2);
    (random_formula(&mut rng, dim, &c, depth), c, dim)
}

fn lasso(seed: u64, dim: usize) -> LassoWord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuple = |rng: &mut ChaCha8Rng| (0..dim).map(|_| random_word(rng, 2, &[1, 2])).collect::<Vec<Word>>();
    let p = rng.gen_range(0..3);
    let l = rng.gen_range(1..4);
    let prefix = (0..p).map(|_| tuple(&mut rng)).collect();
    let cycle = (0..l).map(|_| tuple(&mut rng)).collect();
    LassoWord::periodic(prefix, cycle)
}

/// Raises some term exponents to exercise the auxiliary-variable chains.
fn stretch_terms(f: &Formula, rng: &mut ChaCha8Rng) -> Formula {
    let t = |x: &LTerm, rng: &mut ChaCha8Rng| match *x {
        LTerm::Var { index, shift } if rng.gen_bool(0.5) => LTerm::Var { index, shift: shift + rng.gen_range(1..3) },
        other => other,
    };
    match f {
        Formula::Atom { rel, a, b } => {
            let a = t(a, rng);
            let b = t(b, rng);
            Formula::atom(*rel, a, b)
        }
        Formula::Not(g) => Formula::not(stretch_terms(g, rng)),
        Formula::And(x, y) => Formula::and(stretch_terms(x, rng), stretch_terms(y, rng)),
        Formula::Or(x, y) => Formula::or(stretch_terms(x, rng), stretch_terms(y, rng)),
        Formula::Next(g) => Formula::next(stretch_terms(g, rng)),
        Formula::Until(x, y) => Formula::until(stretch_terms(x, rng), stretch_terms(y, rng)),
        Formula::Release(x, y) => Formula::release(stretch_terms(x, rng), stretch_terms(y, rng)),
        Formula::Globally(g) => Formula::globally(stretch_terms(g, rng)),
        Formula::Finally(g) => Formula::finally(stretch_terms(g, rng)),
        Formula::True | Formula::False => f.clone(),
    }
}

/// Reads the chain constraints `eq(u, x)` / `eq(u, X v)` of the trailing
/// `G` conjunct, returning for each auxiliary its source variable and lag.
fn chains(g: &Formula, dim: usize) -> BTreeMap<usize, (usize, usize)> {
    let mut atoms = Vec::new();
    if let Formula::And(_, tail) = g {
        if let Formula::Globally(body) = &**tail {
            body.atoms(&mut atoms);
        }
    }
    let mut out: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let fresh = |&(rel, a, _): &(Rel, LTerm, LTerm)| {
        rel == Rel::Eq && matches!(a, LTerm::Var { index, shift: 0 } if index >= dim)
    };
    if atoms.is_empty() || !atoms.iter().all(fresh) {
        return out;
    }
    let mut pending = atoms;
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&(rel, a, b)| {
            let (LTerm::Var { index: u, shift: 0 }, LTerm::Var { index: v, shift }) = (a, b) else { return true };
            debug_assert_eq!(rel, Rel::Eq);
            let src = if v < dim { Some((v, 0)) } else { out.get(&v).copied() };
            match src {
                Some((x, lag)) => {
                    out.insert(u, (x, lag + shift));
                    false
                }
                None => true,
            }
        });
        assert!(pending.len() < before, "unresolved chain constraints");
    }
    out
}

/// Appends the forced auxiliary values: `u(t) = x(t + lag)`.
fn with_aux(w: &LassoWord, aux: &BTreeMap<usize, (usize, usize)>) -> LassoWord {
    let (p, l) = (w.prefix.len(), w.cycle.len());
    let at = |t: usize| if t < p { &w.prefix[t] } else { &w.cycle[(t - p) % l] };
    let extend = |t: usize| {
        let mut v = at(t).clone();
        for &(x, lag) in aux.values() {
            v.push(at(t + lag)[x].clone());
        }
        v
    };
    LassoWord::periodic((0..p).map(extend).collect(), (p..p + l).map(extend).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nnf_preserves_truth(seed in any::<u64>()) {
        let (f, c, dim) = instance(seed, 4);
        let g = to_nnf(&f);
        prop_assert!(is_nnf(&g));
        let w = lasso(seed ^ 1, dim);
        prop_assert_eq!(eval_formula(&f, &w, &c).unwrap(), eval_formula(&g, &w, &c).unwrap());
    }

    #[test]
    fn exponent_elimination_agrees_on_forced_values(seed in any::<u64>()) {
        let (f, c, _) = instance(seed, 3);
        let f = stretch_terms(&f, &mut ChaCha8Rng::seed_from_u64(seed ^ 2));
        let g = eliminate_exponents(&f);
        prop_assert!(g.max_shift() <= 1);
        // Fresh variables are numbered from the formula's own arity.
        let w = lasso(seed ^ 3, f.dim().max(1));
        let aux = chains(&g, f.dim());
        prop_assert_eq!(eval_formula(&f, &w, &c).unwrap(), eval_formula(&g, &with_aux(&w, &aux), &c).unwrap());
    }

    /// On ultimately periodic words the translation accepts exactly the models.
    #[test]
    fn translation_accepts_exactly_the_models(seed in any::<u64>()) {
        let (f, c, dim) = instance(seed, 3);
        let a = translate(&to_nnf(&f), &c, dim).unwrap();
        for k in 0..4 {
            let w = lasso(seed ^ (10 + k), dim);
            prop_assert_eq!(lasso_accepted(&a, &w).unwrap(), eval_formula(&f, &w, &c).unwrap());
        }
    }

    #[test]
    fn display_round_trip(seed in any::<u64>()) {
        let (f, c, _) = instance(seed, 4);
        prop_assert_eq!(parse_formula(&f.display(&c).to_string(), &c).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Bounded lassos of the translation are models, and then sat agrees.
    #[test]
    fn oracle_lassos_are_models(seed in any::<u64>()) {
        let (f, c, dim) = instance(seed, 2);
        let a = translate(&to_nnf(&f), &c, dim).unwrap();
        let b = SearchBounds { max_word_length: 2, ..SearchBounds::default() };
        if let Some(cert) = bounded_emptiness(&a, &b) {
            let vals = |r: &[treeltl::order_types::Configuration]| {
                r[..r.len() - 1].iter().map(|x| x.values.clone()).collect::<Vec<_>>()
            };
            let w = LassoWord::periodic(vals(&cert.prefix_run), vals(&cert.loop_run));
            prop_assert!(eval_formula(&f, &w, &c).unwrap());
            prop_assert!(sat(&f, Branching::Infinite, &c).unwrap().satisfiable);
        }
    }

    #[test]
    fn model_checking_the_universal_automaton_is_sat(seed in any::<u64>()) {
        let (f, c, dim) = instance(seed, 2);
        let u = ConstraintAutomaton::universal(dim, c.clone());
        let m = mc(&u, &f, Branching::Infinite, &c).unwrap();
        let s = sat(&f, Branching::Infinite, &c).unwrap();
        prop_assert_eq!(m.satisfiable, s.satisfiable);
        if let Some(w) = &m.witness {
            prop_assert!(eval_formula(&f, &w.project(f.dim()), &c).unwrap());
        }
    }
}
