//! Negation normal form and elimination of term exponents above one.

use std::collections::BTreeMap;

use super::formula::{Formula, LTerm};
use crate::automata::Rel;

/// Pushes negations down to atoms using the usual dualities.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    let b = |g: &Formula, n: bool| nnf(g, n);
    match (f, neg) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Atom { .. }, false) => f.clone(),
        (Formula::Atom { .. }, true) => Formula::not(f.clone()),
        (Formula::Not(g), n) => b(g, !n),
        (Formula::And(x, y), false) => Formula::and(b(x, false), b(y, false)),
        (Formula::And(x, y), true) => Formula::or(b(x, true), b(y, true)),
        (Formula::Or(x, y), false) => Formula::or(b(x, false), b(y, false)),
        (Formula::Or(x, y), true) => Formula::and(b(x, true), b(y, true)),
        (Formula::Next(g), n) => Formula::next(b(g, n)),
        (Formula::Until(x, y), false) => Formula::until(b(x, false), b(y, false)),
        (Formula::Until(x, y), true) => Formula::release(b(x, true), b(y, true)),
        (Formula::Release(x, y), false) => Formula::release(b(x, false), b(y, false)),
        (Formula::Release(x, y), true) => Formula::until(b(x, true), b(y, true)),
        (Formula::Globally(g), false) => Formula::globally(b(g, false)),
        (Formula::Globally(g), true) => Formula::finally(b(g, true)),
        (Formula::Finally(g), false) => Formula::finally(b(g, false)),
        (Formula::Finally(g), true) => Formula::globally(b(g, true)),
    }
}

/// Whether negations occur only directly above atoms.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::Not(g) => matches!(**g, Formula::Atom { .. }),
        _ => f.children().iter().all(|c| is_nnf(c)),
    }
}

/// Equisatisfiable formula with all term exponents at most one; fresh
/// variables are numbered from `f.dim()`.
pub fn eliminate_exponents(f: &Formula) -> Formula {
    eliminate_exponents_from(f, f.dim())
}

/// As [`eliminate_exponents`], numbering fresh variables from `first_fresh`.
///
/// An atom `X^i x ∗ X^j y` first becomes `X^m (X^(i−m) x ∗ X^(j−m) y)` with
/// `m = min(i, j)`. A remaining term `X^i x` with `i ≥ 2` is replaced by a
/// fresh `u_i` of the chain `u_0, …, u_i` constrained by
/// `G(eq(u_0, x) ∧ ⋀_j eq(u_j, X u_(j−1)))`, so `u_j` holds `x` shifted by
/// `j` positions.
pub fn eliminate_exponents_from(f: &Formula, first_fresh: usize) -> Formula {
    if f.max_shift() <= 1 {
        return f.clone();
    }
    let mut need: BTreeMap<usize, usize> = BTreeMap::new();
    collect(f, &mut need);
    if need.is_empty() {
        return rewrite(f, &BTreeMap::new());
    }
    let mut chains: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next = first_fresh.max(f.dim());
    let mut constraints = Vec::new();
    for (&var, &len) in &need {
        chains.insert(var, next);
        let u = |j: usize| LTerm::var(next + j);
        constraints.push(Formula::atom(Rel::Eq, u(0), LTerm::var(var)));
        for j in 1..=len {
            constraints.push(Formula::atom(Rel::Eq, u(j), LTerm::next(next + j - 1)));
        }
        next += len + 1;
    }
    Formula::and(rewrite(f, &chains), Formula::globally(Formula::all(constraints)))
}

fn rebalance(a: LTerm, b: LTerm) -> (usize, LTerm, LTerm) {
    match (a, b) {
        (LTerm::Var { index: i, shift: s }, LTerm::Var { index: j, shift: t }) if s.max(t) >= 2 => {
            let m = s.min(t);
            (m, LTerm::Var { index: i, shift: s - m }, LTerm::Var { index: j, shift: t - m })
        }
        _ => (0, a, b),
    }
}

fn collect(f: &Formula, need: &mut BTreeMap<usize, usize>) {
    if let Formula::Atom { a, b, .. } = f {
        let (_, a, b) = rebalance(*a, *b);
        for t in [a, b] {
            if let LTerm::Var { index, shift } = t {
                if shift >= 2 {
                    let e = need.entry(index).or_insert(0);
                    *e = (*e).max(shift);
                }
            }
        }
    }
    for c in f.children() {
        collect(c, need);
    }
}

fn rewrite(f: &Formula, chains: &BTreeMap<usize, usize>) -> Formula {
    let term = |t: LTerm| match t {
        LTerm::Var { index, shift } if shift >= 2 => LTerm::var(chains[&index] + shift),
        t => t,
    };
    let literal = |rel: Rel, a: LTerm, b: LTerm, neg: bool| {
        let (m, a, b) = rebalance(a, b);
        let mut g = Formula::atom(rel, term(a), term(b));
        if neg {
            g = Formula::not(g);
        }
        (0..m).fold(g, |g, _| Formula::next(g))
    };
    let r = |g: &Formula| rewrite(g, chains);
    match f {
        Formula::Atom { rel, a, b } => literal(*rel, *a, *b, false),
        Formula::Not(g) => match &**g {
            Formula::Atom { rel, a, b } => literal(*rel, *a, *b, true),
            g => Formula::not(r(g)),
        },
        Formula::True | Formula::False => f.clone(),
        Formula::And(x, y) => Formula::and(r(x), r(y)),
        Formula::Or(x, y) => Formula::or(r(x), r(y)),
        Formula::Next(g) => Formula::next(r(g)),
        Formula::Until(x, y) => Formula::until(r(x), r(y)),
        Formula::Release(x, y) => Formula::release(r(x), r(y)),
        Formula::Globally(g) => Formula::globally(r(g)),
        Formula::Finally(g) => Formula::finally(r(g)),
    }
}
