//! Evaluation of formulas on lasso-shaped data words.

use super::formula::{Formula, LTerm};
use super::LogicError;
use crate::automata::ConstraintAutomaton;
use crate::engine::components;
use crate::tree::{ConstantSet, Word};

/// An ultimately periodic data word `prefix · cycle^ω`.
///
/// With `wrap` set, the word is instead obtained by pumping a stretching
/// loop: the successor of the last cycle position carries the values `wrap`
/// (the end of the loop) rather than the first cycle tuple. Relations between
/// consecutive positions then repeat with the cycle, so formulas whose terms
/// look at most one position ahead are evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Vec<Word>>,
    pub cycle: Vec<Vec<Word>>,
    pub wrap: Option<Vec<Word>>,
}

impl LassoWord {
    pub fn periodic(prefix: Vec<Vec<Word>>, cycle: Vec<Vec<Word>>) -> LassoWord {
        LassoWord { prefix, cycle, wrap: None }
    }

    fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    fn succ(&self, t: usize) -> usize {
        if t + 1 == self.len() {
            self.prefix.len()
        } else {
            t + 1
        }
    }

    fn tuple(&self, t: usize) -> &[Word] {
        if t < self.prefix.len() {
            &self.prefix[t]
        } else {
            &self.cycle[t - self.prefix.len()]
        }
    }

    pub fn map_values(&self, f: &dyn Fn(&Word) -> Word) -> LassoWord {
        let m = |v: &Vec<Word>| v.iter().map(f).collect::<Vec<_>>();
        LassoWord {
            prefix: self.prefix.iter().map(m).collect(),
            cycle: self.cycle.iter().map(m).collect(),
            wrap: self.wrap.as_ref().map(m),
        }
    }

    /// Keeps the first `n` components of every tuple.
    pub fn project(&self, n: usize) -> LassoWord {
        let m = |v: &Vec<Word>| v[..n.min(v.len())].to_vec();
        LassoWord {
            prefix: self.prefix.iter().map(m).collect(),
            cycle: self.cycle.iter().map(m).collect(),
            wrap: self.wrap.as_ref().map(m),
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &Word> {
        self.prefix.iter().chain(&self.cycle).chain(self.wrap.iter()).flatten()
    }
}

struct Ctx<'a> {
    w: &'a LassoWord,
    constants: &'a ConstantSet,
}

impl Ctx<'_> {
    fn value(&self, t: usize, term: &LTerm) -> Result<&Word, LogicError> {
        let (index, shift) = match *term {
            LTerm::Const(c) => return Ok(self.constants.value(c)),
            LTerm::Var { index, shift } => (index, shift),
        };
        let last = self.w.len() - 1;
        let mut pos = t;
        for s in 0..shift {
            if pos == last {
                if let Some(wrap) = &self.w.wrap {
                    if s + 1 == shift {
                        return wrap.get(index).ok_or(LogicError::ArityMismatch { index, arity: wrap.len() });
                    }
                    return Err(LogicError::ShiftBeyondWrap);
                }
            }
            pos = self.w.succ(pos);
        }
        let tuple = self.w.tuple(pos);
        tuple.get(index).ok_or(LogicError::ArityMismatch { index, arity: tuple.len() })
    }

    /// Truth value of `f` at every position.
    fn eval(&self, f: &Formula) -> Result<Vec<bool>, LogicError> {
        let n = self.w.len();
        let next = |v: &[bool]| (0..n).map(|t| v[self.w.succ(t)]).collect::<Vec<_>>();
        Ok(match f {
            Formula::True => vec![true; n],
            Formula::False => vec![false; n],
            Formula::Atom { rel, a, b } => {
                let mut out = Vec::with_capacity(n);
                for t in 0..n {
                    out.push(rel.holds(self.value(t, a)?, self.value(t, b)?));
                }
                out
            }
            Formula::Not(g) => self.eval(g)?.into_iter().map(|b| !b).collect(),
            Formula::And(x, y) => {
                let (a, b) = (self.eval(x)?, self.eval(y)?);
                a.iter().zip(&b).map(|(p, q)| *p && *q).collect()
            }
            Formula::Or(x, y) => {
                let (a, b) = (self.eval(x)?, self.eval(y)?);
                a.iter().zip(&b).map(|(p, q)| *p || *q).collect()
            }
            Formula::Next(g) => next(&self.eval(g)?),
            Formula::Until(x, y) => self.fixpoint(&self.eval(x)?, &self.eval(y)?, false),
            Formula::Release(x, y) => self.fixpoint(&self.eval(x)?, &self.eval(y)?, true),
            Formula::Globally(g) => self.fixpoint(&vec![false; n], &self.eval(g)?, true),
            Formula::Finally(g) => self.fixpoint(&vec![true; n], &self.eval(g)?, false),
        })
    }

    /// Least fixpoint of `v = b ∨ (a ∧ X v)` for until, greatest fixpoint of
    /// `v = b ∧ (a ∨ X v)` for release.
    fn fixpoint(&self, a: &[bool], b: &[bool], release: bool) -> Vec<bool> {
        let n = a.len();
        let mut v = vec![release; n];
        loop {
            let mut changed = false;
            for t in (0..n).rev() {
                let nv = v[self.w.succ(t)];
                let x = if release { b[t] && (a[t] || nv) } else { b[t] || (a[t] && nv) };
                if x != v[t] {
                    v[t] = x;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }
}

/// Whether `w` satisfies `f` at its first position.
pub fn eval_formula(f: &Formula, w: &LassoWord, constants: &ConstantSet) -> Result<bool, LogicError> {
    if w.cycle.is_empty() {
        return Err(LogicError::EmptyCycle);
    }
    Ok(Ctx { w, constants }.eval(f)?[0])
}

/// Whether `a` has an accepting run on `w`, reading the first `a.dim`
/// components. Steps out of the last cycle position read `wrap` when set.
pub fn lasso_accepted(a: &ConstraintAutomaton, w: &LassoWord) -> Result<bool, LogicError> {
    if w.cycle.is_empty() {
        return Err(LogicError::EmptyCycle);
    }
    let n = w.len();
    for t in 0..n {
        if w.tuple(t).len() < a.dim {
            return Err(LogicError::ArityMismatch { index: a.dim - 1, arity: w.tuple(t).len() });
        }
    }
    let states = a.states.len();
    let node = |t: usize, q: usize| t * states + q;
    let mut edges = vec![Vec::new(); n * states];
    for t in 0..n {
        let x = &w.tuple(t)[..a.dim];
        let y = match (&w.wrap, t + 1 == n) {
            (Some(wrap), true) => &wrap[..a.dim],
            _ => &w.tuple(w.succ(t))[..a.dim],
        };
        for tr in &a.transitions {
            if tr.guard.eval_words(x, y, &a.constants) {
                edges[node(t, tr.from)].push(node(w.succ(t), tr.to));
            }
        }
    }
    let mut reach = vec![false; n * states];
    let mut stack: Vec<usize> = a.initial.iter().map(|&q| node(0, q)).collect();
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut reach[v], true) {
            stack.extend(&edges[v]);
        }
    }
    let (comp, cyclic) = components(&edges);
    Ok((0..n * states).any(|v| reach[v] && cyclic[comp[v]] && a.is_final(v % states)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula_file;

    fn word(s: &str) -> Vec<Word> {
        s.split(',').map(|v| v.parse().unwrap()).collect()
    }

    fn check(src: &str, prefix: &[&str], cycle: &[&str]) -> bool {
        let (f, c) = parse_formula_file(src).unwrap();
        let w = LassoWord::periodic(prefix.iter().map(|s| word(s)).collect(), cycle.iter().map(|s| word(s)).collect());
        eval_formula(&f, &w, &c).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert!(check("G eq(x1, X x1)", &[], &["1"]));
        assert!(!check("G (pref(x1,Xx1) & !eq(x1,Xx1))", &["1"], &["1.1", "1.1.1"]));
        assert!(check("const c1 = 1;\nconst c2 = 2;\n(eq(x1,c1) U eq(x1,c2))", &["1"], &["2"]));
        assert!(!check("const c1 = 1;\nconst c2 = 2;\n(eq(x1,c1) U eq(x1,c2))", &["1"], &["1"]));
        assert!(check("F G eq(x1, X x1)", &["1"], &["3"]));
        assert!(!check("G F !eq(x1, X x1)", &["1"], &["3"]));
    }

    #[test]
    fn wrap_reads_the_loop_end() {
        let (f, c) = parse_formula_file("G (pref(x1,Xx1) & !eq(x1,Xx1))").unwrap();
        let w = LassoWord { prefix: vec![], cycle: vec![word("1")], wrap: Some(word("1.1")) };
        assert!(eval_formula(&f, &w, &c).unwrap());
        let (g, _) = parse_formula_file("G pref(x1, X^2 x1)").unwrap();
        assert_eq!(eval_formula(&g, &w, &c), Err(LogicError::ShiftBeyondWrap));
    }
}
