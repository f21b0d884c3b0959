//! Tableau translation of normalized formulas into constraint automata.
//!
//! A state carries the obligations for the current position. Expanding its
//! conjunction yields alternatives `(guard, next obligations, postponed
//! untils)`; the guard constrains the current and next values, which is
//! exactly what a constraint-automaton transition can see. Fairness for each
//! until is degeneralized with a round-robin counter.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::formula::{Formula, LTerm};
use super::normalize::is_nnf;
use super::LogicError;
use crate::automata::{ConstraintAutomaton, Guard, Term, Transition};
use crate::tree::ConstantSet;

#[derive(Clone, Debug)]
struct Alt {
    guard: Guard,
    next: BTreeSet<Formula>,
    postponed: BTreeSet<usize>,
}

fn term(t: &LTerm) -> Term {
    match *t {
        LTerm::Var { index, shift: 0 } => Term::X(index),
        LTerm::Var { index, .. } => Term::Y(index),
        LTerm::Const(c) => Term::Const(c),
    }
}

fn guard_of(f: &Formula) -> Guard {
    match f {
        Formula::True => Guard::True,
        Formula::False => Guard::False,
        Formula::Atom { rel, a, b } => Guard::atom(*rel, term(a), term(b)),
        Formula::Not(g) => guard_of(g).negate(),
        Formula::And(a, b) => Guard::and(vec![guard_of(a), guard_of(b)]),
        Formula::Or(a, b) => Guard::or(vec![guard_of(a), guard_of(b)]),
        _ => unreachable!("temporal operator in a propositional formula"),
    }
}

fn product(xs: &[Alt], ys: &[Alt]) -> Vec<Alt> {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for x in xs {
        for y in ys {
            let guard = Guard::and(vec![x.guard.clone(), y.guard.clone()]);
            if guard == Guard::False {
                continue;
            }
            out.push(Alt {
                guard,
                next: x.next.union(&y.next).cloned().collect(),
                postponed: x.postponed.union(&y.postponed).cloned().collect(),
            });
        }
    }
    merge(out)
}

/// Joins alternatives with equal obligations and postponements.
fn merge(alts: Vec<Alt>) -> Vec<Alt> {
    let mut out: Vec<Alt> = Vec::new();
    for a in alts {
        match out.iter_mut().find(|b| b.next == a.next && b.postponed == a.postponed) {
            Some(b) => b.guard = Guard::or(vec![b.guard.clone(), a.guard]),
            None => out.push(a),
        }
    }
    out
}

fn step(next: Option<&Formula>, postponed: Option<usize>) -> Alt {
    Alt {
        guard: Guard::True,
        next: next.into_iter().cloned().collect(),
        postponed: postponed.into_iter().collect(),
    }
}

struct Tableau {
    untils: HashMap<Formula, usize>,
    memo: HashMap<Formula, Vec<Alt>>,
}

impl Tableau {
    fn expand(&mut self, f: &Formula) -> Vec<Alt> {
        if let Some(a) = self.memo.get(f) {
            return a.clone();
        }
        let out = if f.is_propositional() {
            let g = guard_of(f);
            if g == Guard::False {
                Vec::new()
            } else {
                vec![Alt { guard: g, next: BTreeSet::new(), postponed: BTreeSet::new() }]
            }
        } else {
            match f {
                Formula::And(a, b) => {
                    let (x, y) = (self.expand(a), self.expand(b));
                    product(&x, &y)
                }
                Formula::Or(a, b) => {
                    let mut x = self.expand(a);
                    x.extend(self.expand(b));
                    merge(x)
                }
                Formula::Next(a) => vec![step(Some(a), None)],
                Formula::Until(a, b) => {
                    let k = self.untils[f];
                    let mut x = self.expand(b);
                    x.extend(product(&self.expand(a), &[step(Some(f), Some(k))]));
                    merge(x)
                }
                Formula::Finally(a) => {
                    let k = self.untils[f];
                    let mut x = self.expand(a);
                    x.push(step(Some(f), Some(k)));
                    merge(x)
                }
                Formula::Release(a, b) => {
                    let mut stay = self.expand(a);
                    stay.push(step(Some(f), None));
                    product(&self.expand(b), &merge(stay))
                }
                Formula::Globally(a) => product(&self.expand(a), &[step(Some(f), None)]),
                _ => unreachable!("propositional case handled above"),
            }
        };
        self.memo.insert(f.clone(), out.clone());
        out
    }
}

fn number_untils(f: &Formula, out: &mut HashMap<Formula, usize>) {
    for c in f.children() {
        number_untils(c, out);
    }
    if matches!(f, Formula::Until(..) | Formula::Finally(_)) && !out.contains_key(f) {
        let k = out.len();
        out.insert(f.clone(), k);
    }
}

/// Translates a formula in negation normal form with exponents at most one.
/// The automaton reads tuples of `dim` values (at least the formula's).
pub fn translate(f: &Formula, constants: &ConstantSet, dim: usize) -> Result<ConstraintAutomaton, LogicError> {
    if !is_nnf(f) || f.max_shift() > 1 {
        return Err(LogicError::NotNormalized);
    }
    let dim = dim.max(f.dim());
    let mut untils = HashMap::new();
    number_untils(f, &mut untils);
    let k = untils.len();
    let mut tab = Tableau { untils, memo: HashMap::new() };

    type Key = (BTreeSet<Formula>, usize, bool);
    let start: Key = ([f.clone()].into_iter().collect(), 0, false);
    let mut ids: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    keys.push(start);
    queue.push_back(0);
    let mut transitions = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (obligations, counter, _) = keys[id].clone();
        let mut alts = vec![step(None, None)];
        for o in &obligations {
            let e = tab.expand(o);
            alts = product(&alts, &e);
        }
        for alt in alts {
            let (counter, acc) = if k == 0 {
                (0, true)
            } else if alt.postponed.contains(&counter) {
                (counter, false)
            } else if counter + 1 == k {
                (0, true)
            } else {
                (counter + 1, false)
            };
            let key: Key = (alt.next, counter, acc);
            let to = *ids.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                queue.push_back(keys.len() - 1);
                keys.len() - 1
            });
            transitions.push(Transition { from: id, to, guard: alt.guard });
        }
    }
    let finals = (0..keys.len()).filter(|&i| keys[i].2 || k == 0).collect();
    let states = (0..keys.len()).map(|i| format!("s{i}")).collect();
    Ok(ConstraintAutomaton::new(dim, constants.clone(), states, vec![0], finals, transitions)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::is_empty;
    use crate::logic::{parse_formula, to_nnf};

    fn nonempty(s: &str) -> bool {
        let c = ConstantSet::default();
        let f = to_nnf(&parse_formula(s, &c).unwrap());
        is_empty(&translate(&f, &c, 1).unwrap()).unwrap().nonempty
    }

    #[test]
    fn translation_examples() {
        assert!(nonempty("G pref(x1, X x1)"));
        assert!(!nonempty("G (pref(X x1, x1) & !eq(x1, X x1))"));
        assert!(nonempty("eq(x1,x1)"));
        assert!(!nonempty("F !eq(x1,x1)"));
        assert!(nonempty("G F !eq(x1, X x1)"));
        assert!(!nonempty("G F !eq(x1, X x1) & F G eq(x1, X x1)"));
    }
}
