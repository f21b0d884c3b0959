//! Explicit saturation of run types under composition.

use std::collections::BTreeSet;

use crate::automata::RunType;
use crate::order_types::{compose_pairs, OrderTypeError};

/// The least set containing `steps` and closed under composing with
/// `steps` on the right: the types of all runs of length at least one.
pub fn saturate(steps: &[RunType]) -> Result<Vec<RunType>, OrderTypeError> {
    let mut all: BTreeSet<RunType> = steps.iter().cloned().collect();
    let mut frontier: Vec<RunType> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for r in &frontier {
            for s in steps.iter().filter(|s| s.from == r.to) {
                if r.pi.second() != s.pi.first() {
                    continue;
                }
                for comp in compose_pairs(&r.pi, &s.pi)? {
                    let t = RunType { from: r.from, pi: comp.outer, to: s.to };
                    if all.insert(t.clone()) {
                        next.push(t);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(all.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{one_step_types, parse_guard, ConstraintAutomaton, Transition};
    use crate::tree::ConstantSet;

    #[test]
    fn strict_descent_saturates_to_itself() {
        let c = ConstantSet::default();
        let g = parse_guard("pref(x1,y1) & !eq(x1,y1)", &c).unwrap();
        let a = ConstraintAutomaton::new(1, c, vec!["q".into()], vec![0], vec![0], vec![Transition { from: 0, to: 0, guard: g }])
            .unwrap();
        let t1 = one_step_types(&a).unwrap();
        let s = saturate(&t1).unwrap();
        assert_eq!(s, t1);
    }
}
