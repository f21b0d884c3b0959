//! Satisfiability and model checking over the rational tree and over the
//! `k`-branching tree.

use super::eval::{eval_formula, lasso_accepted, LassoWord};
use super::formula::{Formula, LTerm};
use super::normalize::{eliminate_exponents_from, to_nnf};
use super::translate::translate;
use super::LogicError;
use crate::automata::{product, ConstraintAutomaton, Rel};
use crate::engine::{is_empty_with, Certificate, EngineOptions, EngineStats};
use crate::order_types::Configuration;
use crate::tree::{embed_word, prefix_leq, ConstantSet, LabelNormalizer, Rational, Word};

/// Branching degree of the data tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branching {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub satisfiable: bool,
    /// The automaton whose emptiness was decided.
    pub automaton: ConstraintAutomaton,
    pub certificate: Option<Certificate>,
    /// A model of the input, restricted to its variables (and mapped into the
    /// `k`-ary tree when `k` is finite), already checked against the input.
    pub witness: Option<LassoWord>,
    pub stats: EngineStats,
}

/// Negation normal form, then exponent elimination with fresh variables
/// numbered from `first_fresh`.
pub fn normalize(f: &Formula, first_fresh: usize) -> Formula {
    eliminate_exponents_from(&to_nnf(f), first_fresh)
}

fn check_labels(constants: &ConstantSet, k: u32) -> Result<(), LogicError> {
    for (name, w) in constants.entries() {
        if !in_kary(w, k) {
            return Err(LogicError::ConstantOutOfRange { name: name.clone(), value: w.to_string(), k });
        }
    }
    Ok(())
}

/// The `⪯`-maximal constants.
pub fn maximal_constants(constants: &ConstantSet) -> Vec<Word> {
    let vals: Vec<&Word> = constants.values().collect();
    vals.iter()
        .filter(|c| !vals.iter().any(|d| *d != **c && prefix_leq(c, d)))
        .map(|c| (*c).clone())
        .collect()
}

/// Whether the maximal constants meet every infinite branch of the
/// `k`-branching tree.
fn covers_branches(constants: &ConstantSet, k: u32) -> bool {
    if constants.is_empty() {
        return false;
    }
    let has = |w: &Word| constants.index_of_value(w).is_some();
    let inner = std::iter::once(Word::empty())
        .chain(constants.values().cloned())
        .filter(|c| constants.values().any(|d| d.len() > c.len() && prefix_leq(c, d)));
    for c in inner {
        if !(1..=k as i64).all(|i| has(&c.child(Rational::integer(i)))) {
            return false;
        }
    }
    true
}

/// Completes the constants so their maximal elements meet every branch of
/// the `k`-ary tree, and conjoins `G ⋀_i ⋁_{c maximal} (x_i ⪯ c ∨ c ⪯ x_i)`.
/// Constant indices of `f` are remapped into the returned set.
pub fn kary_reduce(f: &Formula, k: u32, constants: &ConstantSet) -> Result<(Formula, ConstantSet), LogicError> {
    kary_reduce_over(f, k, constants, f.dim())
}

/// As [`kary_reduce`], confining the first `dim` variables.
fn kary_reduce_over(
    f: &Formula,
    k: u32,
    constants: &ConstantSet,
    dim: usize,
) -> Result<(Formula, ConstantSet), LogicError> {
    if k < 2 {
        return Err(LogicError::InvalidBranching(k));
    }
    check_labels(constants, k)?;
    let mut entries: Vec<(String, Word)> = constants.entries().to_vec();
    if !covers_branches(constants, k) {
        let base: Vec<Word> = std::iter::once(Word::empty()).chain(constants.values().cloned()).collect();
        for c in base {
            for i in 1..=k as i64 {
                let w = c.child(Rational::integer(i));
                if entries.iter().all(|(_, v)| *v != w) {
                    let set = ConstantSet::closed(entries.clone())?;
                    let name = set.fresh_name(&w).replacen("pc_", "k_", 1);
                    entries.push((name, w));
                }
            }
        }
    }
    let extended = ConstantSet::closed(entries)?;
    let map: Vec<usize> = constants
        .values()
        .map(|v| extended.index_of_value(v).expect("superset"))
        .collect();
    let g = f.map_consts(&|c| map[c]);
    let leaves = maximal_constants(&extended);
    let confine = (0..dim.max(f.dim())).map(|i| {
        Formula::any(leaves.iter().map(|c| {
            let c = LTerm::Const(extended.index_of_value(c).expect("constant"));
            Formula::or(Formula::atom(Rel::Pref, LTerm::var(i), c), Formula::atom(Rel::Pref, c, LTerm::var(i)))
        }))
    });
    let psi = Formula::and(g, Formula::globally(Formula::all(confine)));
    Ok((psi, extended))
}

/// Maps a value of a model of the reduced formula into the `k`-ary tree:
/// the part below its maximal constant goes through the binary embedding.
fn kary_value(w: &Word, leaves: &[Word], norm: &LabelNormalizer) -> Result<Word, LogicError> {
    if let Some(c) = leaves.iter().find(|c| prefix_leq(c, w)) {
        return Ok(c.concat(&embed_word(&norm.apply(&suffix(w, c.len())))?));
    }
    if leaves.iter().any(|c| prefix_leq(w, c)) {
        return Ok(w.clone());
    }
    Err(LogicError::Internal(format!("value {w} escapes the maximal constants")))
}

fn lasso_of(cert: &Certificate) -> LassoWord {
    let vals = |run: &[Configuration]| run.iter().map(|c| c.values.clone()).collect::<Vec<_>>();
    let p = &cert.prefix_run;
    let l = &cert.loop_run;
    LassoWord {
        prefix: vals(&p[..p.len() - 1]),
        cycle: vals(&l[..l.len() - 1]),
        wrap: Some(l[l.len() - 1].values.clone()),
    }
}

fn reduce(
    a: Option<&ConstraintAutomaton>,
    f: &Formula,
    k: Branching,
    constants: &ConstantSet,
) -> Result<(ConstraintAutomaton, ConstantSet), LogicError> {
    if let Some(a) = a {
        if a.constants != *constants {
            return Err(LogicError::ConstantMismatch);
        }
    }
    let base_dim = f.dim().max(a.map_or(0, |a| a.dim)).max(1);
    let (g, cs) = match k {
        Branching::Infinite => (f.clone(), constants.clone()),
        Branching::Finite(k) => kary_reduce_over(f, k, constants, base_dim)?,
    };
    let g = normalize(&g, base_dim);
    let b = translate(&g, &cs, base_dim)?;
    let automaton = match a {
        Some(a) => product(&a.with_constants(&cs)?, &b)?,
        None => b,
    };
    Ok((automaton, cs))
}

/// The automaton whose nonemptiness decides `sat` (`a = None`) or `mc`;
/// certificates returned by those refer to it.
pub fn problem_automaton(
    a: Option<&ConstraintAutomaton>,
    f: &Formula,
    k: Branching,
    constants: &ConstantSet,
) -> Result<ConstraintAutomaton, LogicError> {
    Ok(reduce(a, f, k, constants)?.0)
}

fn solve(
    a: Option<&ConstraintAutomaton>,
    f: &Formula,
    k: Branching,
    constants: &ConstantSet,
    opts: EngineOptions,
) -> Result<Outcome, LogicError> {
    let base_dim = f.dim().max(a.map_or(0, |a| a.dim)).max(1);
    let (automaton, cs) = reduce(a, f, k, constants)?;
    let verdict = is_empty_with(&automaton, opts)?;
    let mut witness = None;
    if let Some(cert) = &verdict.certificate {
        let mut w = lasso_of(cert).project(base_dim);
        if let Branching::Finite(k) = k {
            w = into_kary(&w, k, &cs)?;
        }
        // Revalidate against the inputs, independently of the translation.
        if !eval_formula(f, &w, constants)? {
            return Err(LogicError::Internal("witness does not satisfy the formula".into()));
        }
        if let Some(a) = a {
            if !lasso_accepted(a, &w)? {
                return Err(LogicError::Internal("witness is not accepted by the automaton".into()));
            }
        }
        witness = Some(w);
    }
    Ok(Outcome {
        satisfiable: verdict.nonempty,
        automaton,
        certificate: verdict.certificate,
        witness,
        stats: verdict.stats,
    })
}

fn into_kary(w: &LassoWord, k: u32, cs: &ConstantSet) -> Result<LassoWord, LogicError> {
    let leaves = maximal_constants(cs);
    let rests: Vec<Word> = w
        .values()
        .filter_map(|v| leaves.iter().find(|c| prefix_leq(c, v)).map(|c| suffix(v, c.len())))
        .collect();
    let norm = LabelNormalizer::for_words(&rests);
    for v in w.values() {
        kary_value(v, &leaves, &norm)?;
    }
    let out = w.map_values(&|v| kary_value(v, &leaves, &norm).expect("checked above"));
    if !out.values().all(|v| in_kary(v, k)) {
        return Err(LogicError::Internal("mapped witness leaves the k-ary tree".into()));
    }
    Ok(out)
}

fn in_kary(w: &Word, k: u32) -> bool {
    w.labels()
        .iter()
        .all(|l| l.is_integer() && l.to_i64().is_some_and(|v| (1..=k as i64).contains(&v)))
}

fn suffix(w: &Word, from: usize) -> Word {
    Word::from_labels(w.labels()[from..].to_vec())
}

/// Satisfiability over the rational tree (`Infinite`) or the `k`-ary tree.
pub fn sat(f: &Formula, k: Branching, constants: &ConstantSet) -> Result<Outcome, LogicError> {
    solve(None, f, k, constants, EngineOptions::default())
}

pub fn sat_with(f: &Formula, k: Branching, constants: &ConstantSet, opts: EngineOptions) -> Result<Outcome, LogicError> {
    solve(None, f, k, constants, opts)
}

/// Whether some data word accepted by `a` satisfies `f`.
pub fn mc(a: &ConstraintAutomaton, f: &Formula, k: Branching, constants: &ConstantSet) -> Result<Outcome, LogicError> {
    mc_with(a, f, k, constants, EngineOptions::default())
}

pub fn mc_with(
    a: &ConstraintAutomaton,
    f: &Formula,
    k: Branching,
    constants: &ConstantSet,
    opts: EngineOptions,
) -> Result<Outcome, LogicError> {
    solve(Some(a), f, k, constants, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{parse_guard, Transition};
    use crate::logic::{parse_formula, parse_formula_file};

    fn sat_src(src: &str, k: Branching) -> Outcome {
        let (f, c) = parse_formula_file(src).unwrap();
        sat(&f, k, &c).unwrap()
    }

    #[test]
    fn satisfiability_examples() {
        let up = sat_src("G (pref(x1,Xx1) & !eq(x1,Xx1))", Branching::Infinite);
        assert!(up.satisfiable);
        assert!(up.witness.is_some());
        let bounded = "const c1 = 1;\nconst c2 = 1.2.3;\n\
                       eq(x1,c1) & G(pref(x1,Xx1) & !eq(x1,Xx1) & pref(Xx1,c2))";
        assert!(!sat_src(bounded, Branching::Infinite).satisfiable);
        let lex = "const c1 = 2;\nG(lex(x1,Xx1) & !eq(x1,Xx1) & lex(Xx1,c1) & !eq(Xx1,c1))";
        assert!(sat_src(lex, Branching::Infinite).satisfiable);
    }

    #[test]
    fn binary_tree_witnesses() {
        let out = sat_src("G (pref(x1,Xx1) & !eq(x1,Xx1))", Branching::Finite(2));
        assert!(out.satisfiable);
        let w = out.witness.unwrap();
        assert!(w.values().all(|v| in_kary(v, 2)));
        let lex = "const c1 = 2;\nG(lex(x1,Xx1) & !eq(x1,Xx1) & lex(Xx1,c1) & !eq(Xx1,c1))";
        let out = sat_src(lex, Branching::Finite(2));
        assert!(out.satisfiable);
        assert!(out.witness.unwrap().values().all(|v| in_kary(v, 2)));
    }

    #[test]
    fn model_checking_examples() {
        let c = ConstantSet::default();
        let f = parse_formula("G (pref(x1,Xx1) & !eq(x1,Xx1))", &c).unwrap();
        let universal = ConstraintAutomaton::universal(1, c.clone());
        assert!(mc(&universal, &f, Branching::Infinite, &c).unwrap().satisfiable);
        let still = ConstraintAutomaton::new(
            1,
            c.clone(),
            vec!["q".into()],
            vec![0],
            vec![0],
            vec![Transition { from: 0, to: 0, guard: parse_guard("eq(x1,y1)", &c).unwrap() }],
        )
        .unwrap();
        assert!(!mc(&still, &f, Branching::Infinite, &c).unwrap().satisfiable);
        let g = parse_formula("G eq(x1, X x1)", &c).unwrap();
        let out = mc(&still, &g, Branching::Infinite, &c).unwrap();
        assert!(out.satisfiable);
        assert!(lasso_accepted(&still, out.witness.as_ref().unwrap()).unwrap());
        let other = ConstantSet::closed(vec![("c1".into(), Word::ints(&[1]))]).unwrap();
        assert_eq!(mc(&still, &g, Branching::Infinite, &other).unwrap_err(), LogicError::ConstantMismatch);
    }

    #[test]
    fn constant_completion() {
        let (f, c) = parse_formula_file("const c1 = 1;\nG eq(x1, c1)").unwrap();
        let (_, ext) = kary_reduce(&f, 2, &c).unwrap();
        let vals: Vec<String> = ext.values().map(|v| v.to_string()).collect();
        assert_eq!(vals.len(), 5, "{vals:?}");
        for w in ["1", "2", "1.1", "1.2"] {
            assert!(vals.contains(&w.to_string()), "{w} in {vals:?}");
        }
        let mut leaves: Vec<String> = maximal_constants(&ext).iter().map(|v| v.to_string()).collect();
        leaves.sort();
        assert_eq!(leaves, ["1.1", "1.2", "2"]);

        let (f, c) = parse_formula_file("const a = 1;\nconst b = 2;\nG (eq(x1, a) | pref(b, x2))").unwrap();
        let (psi, ext) = kary_reduce(&f, 2, &c).unwrap();
        assert_eq!(ext, c);
        match psi {
            Formula::And(_, g) => assert_eq!(g.dim(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let (f, c) = parse_formula_file("const a = 3;\nG eq(x1, a)").unwrap();
        assert!(matches!(kary_reduce(&f, 2, &c), Err(LogicError::ConstantOutOfRange { .. })));
        assert!(matches!(sat(&f, Branching::Finite(2), &c), Err(LogicError::ConstantOutOfRange { .. })));
    }
}
