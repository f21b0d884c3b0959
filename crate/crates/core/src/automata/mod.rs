//! Tree-constraint Büchi automata: guarded transitions over current and next
//! data values, run checking, products and one-step types.

mod guard;
mod json;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::order_types::{enumerate_types, Configuration, OrderType, OrderTypeError};
use crate::tree::{ConstantSet, TreeError};

pub(crate) use guard::{relation, variable, Lexer, Tok};
pub use guard::{parse_guard, Guard, GuardDisplay, Rel, Term};
pub use json::{automaton_from_json, automaton_to_json};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared symbol `{name}` at offset {offset}")]
    UndeclaredSymbol { name: String, offset: usize },
    #[error("variable index {index} exceeds dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("constant sets differ")]
    ConstantMismatch,
    #[error("malformed automaton file: {0}")]
    Format(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Types(#[from] OrderTypeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintAutomaton {
    pub dim: usize,
    pub constants: ConstantSet,
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub finals: Vec<usize>,
    pub transitions: Vec<Transition>,
}

impl ConstraintAutomaton {
    /// Validates variable indices and state references.
    pub fn new(
        dim: usize,
        constants: ConstantSet,
        states: Vec<String>,
        initial: Vec<usize>,
        finals: Vec<usize>,
        transitions: Vec<Transition>,
    ) -> Result<ConstraintAutomaton, AutomatonError> {
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        let n = states.len();
        for &q in initial.iter().chain(&finals) {
            if q >= n {
                return Err(AutomatonError::UnknownState(q.to_string()));
            }
        }
        for t in &transitions {
            if t.from >= n || t.to >= n {
                return Err(AutomatonError::UnknownState(format!("{}->{}", t.from, t.to)));
            }
            let d = t.guard.dim();
            if d > dim {
                return Err(AutomatonError::VariableOutOfRange { index: d, dim });
            }
            let mut terms = Vec::new();
            t.guard.terms(&mut terms);
            if terms.iter().any(|t| matches!(t, Term::Const(c) if *c >= constants.len())) {
                return Err(AutomatonError::ConstantMismatch);
            }
        }
        let mut initial = initial;
        let mut finals = finals;
        initial.sort_unstable();
        initial.dedup();
        finals.sort_unstable();
        finals.dedup();
        Ok(ConstraintAutomaton { dim, constants, states, initial, finals, transitions })
    }

    /// The one-state automaton accepting every data word of dimension `dim`.
    pub fn universal(dim: usize, constants: ConstantSet) -> ConstraintAutomaton {
        ConstraintAutomaton {
            dim,
            constants,
            states: vec!["u".into()],
            initial: vec![0],
            finals: vec![0],
            transitions: vec![Transition { from: 0, to: 0, guard: Guard::True }],
        }
    }

    pub fn is_initial(&self, q: usize) -> bool {
        self.initial.binary_search(&q).is_ok()
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals.binary_search(&q).is_ok()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == q)
    }

    /// Whether some transition licenses the step `a → b`.
    pub fn step_ok(&self, a: &Configuration, b: &Configuration) -> bool {
        a.values.len() == self.dim
            && b.values.len() == self.dim
            && self
                .outgoing(a.state)
                .any(|t| t.to == b.state && t.guard.eval_words(&a.values, &b.values, &self.constants))
    }

    /// Replaces the constant set by a superset (guards keep their meaning).
    pub fn with_constants(&self, constants: &ConstantSet) -> Result<ConstraintAutomaton, AutomatonError> {
        let mut map = Vec::with_capacity(self.constants.len());
        for (_, value) in self.constants.entries() {
            map.push(constants.index_of_value(value).ok_or(AutomatonError::ConstantMismatch)?);
        }
        let mut out = self.clone();
        out.constants = constants.clone();
        for t in &mut out.transitions {
            t.guard = t.guard.map_consts(&|c| map[c]);
        }
        Ok(out)
    }
}

/// Whether every consecutive pair of configurations is licensed.
pub fn check_run(a: &ConstraintAutomaton, run: &[Configuration]) -> bool {
    check_run_reason(a, run).is_ok()
}

pub fn check_run_reason(a: &ConstraintAutomaton, run: &[Configuration]) -> Result<(), String> {
    for (i, c) in run.iter().enumerate() {
        if c.state >= a.states.len() {
            return Err(format!("configuration {i} has an unknown state"));
        }
        if c.values.len() != a.dim {
            return Err(format!("configuration {i} has {} values, expected {}", c.values.len(), a.dim));
        }
    }
    for (i, pair) in run.windows(2).enumerate() {
        if !a.step_ok(&pair[0], &pair[1]) {
            return Err(format!("no transition licenses step {i} -> {}", i + 1));
        }
    }
    Ok(())
}

/// Büchi product with a two-phase flag. The smaller automaton reads a prefix
/// of the variable tuple; both must use the same constants.
pub fn product(
    a: &ConstraintAutomaton,
    b: &ConstraintAutomaton,
) -> Result<ConstraintAutomaton, AutomatonError> {
    if a.constants != b.constants {
        return Err(AutomatonError::ConstantMismatch);
    }
    let dim = a.dim.max(b.dim);
    let mut index: HashMap<(usize, usize, u8), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut initial = Vec::new();
    for &p in &a.initial {
        for &q in &b.initial {
            let id = states.len();
            index.insert((p, q, 0), id);
            states.push((p, q, 0u8));
            queue.push_back(id);
            initial.push(id);
        }
    }
    let mut transitions = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (p, q, flag) = states[id];
        let next_flag = match flag {
            0 if a.is_final(p) => 1,
            1 if b.is_final(q) => 0,
            f => f,
        };
        for ta in a.outgoing(p) {
            for tb in b.outgoing(q) {
                let guard = Guard::and(vec![ta.guard.clone(), tb.guard.clone()]);
                if guard == Guard::False {
                    continue;
                }
                let key = (ta.to, tb.to, next_flag);
                let to = *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                transitions.push(Transition { from: id, to, guard });
            }
        }
    }
    let finals = (0..states.len()).filter(|&i| states[i].2 == 0 && a.is_final(states[i].0)).collect();
    let names = states
        .iter()
        .map(|&(p, q, f)| format!("{}|{}|{}", a.states[p], b.states[q], f))
        .collect();
    ConstraintAutomaton::new(dim, a.constants.clone(), names, initial, finals, transitions)
}

/// A discovered one-step type `(q, π, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunType {
    pub from: usize,
    pub pi: OrderType,
    pub to: usize,
}

/// `{(q, π, p) : (q, β, p) ∈ δ, π ⊨ β}`.
pub fn one_step_types(a: &ConstraintAutomaton) -> Result<Vec<RunType>, AutomatonError> {
    if a.transitions.is_empty() {
        return Ok(Vec::new());
    }
    let all = enumerate_types(a.dim, 2, &a.constants)?;
    let mut out = Vec::new();
    for t in &a.transitions {
        for pi in &all {
            if t.guard.eval_type(pi) {
                out.push(RunType { from: t.from, pi: pi.clone(), to: t.to });
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Word;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn single(guard: &str) -> ConstraintAutomaton {
        let c = ConstantSet::default();
        let g = parse_guard(guard, &c).unwrap();
        ConstraintAutomaton::new(1, c, vec!["q".into()], vec![0], vec![0], vec![Transition { from: 0, to: 0, guard: g }])
            .unwrap()
    }

    #[test]
    fn run_checks() {
        let a = single("eq(x1,y1)");
        assert!(check_run(&a, &[Configuration::new(0, vec![w("1")])]));
        assert!(check_run(&a, &[Configuration::new(0, vec![w("1")]), Configuration::new(0, vec![w("1")])]));
        assert!(!check_run(&a, &[Configuration::new(0, vec![w("1")]), Configuration::new(0, vec![w("2")])]));
    }

    #[test]
    fn one_step_examples() {
        assert_eq!(one_step_types(&single("eq(x1,y1)")).unwrap().len(), 2);
        assert_eq!(one_step_types(&single("true")).unwrap().len(), 10);
        assert!(one_step_types(&single("false")).unwrap().is_empty());
        let mut none = single("true");
        none.transitions.clear();
        assert!(one_step_types(&none).unwrap().is_empty());
    }

    #[test]
    fn product_of_single_states() {
        let a = single("pref(x1,y1)");
        let b = single("!eq(x1,y1)");
        let p = product(&a, &b).unwrap();
        assert_eq!(p.transitions.len(), 2);
        assert!(p.transitions.iter().all(|t| t.guard == Guard::and(vec![a.transitions[0].guard.clone(), b.transitions[0].guard.clone()])));
        let u = ConstraintAutomaton::universal(2, ConstantSet::default());
        let pu = product(&a, &u).unwrap();
        assert_eq!(pu.dim, 2);
    }
}
