//! Brute-force ground truth at desk scale: explicit lasso search over a
//! finite set of words, witness-based type composition, and seeded random
//! instances.
//!
//! Nothing here uses the order-type algebra beyond computing the type of a
//! concrete tuple, so it can check the engine.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{ConstraintAutomaton, Guard, Rel, RunType, Term, Transition};
use crate::engine::{components, Certificate};
use crate::logic::{Formula, LTerm};
use crate::order_types::{typ_pair, Configuration, OrderType};
use crate::tree::{lex_leq, prefix_leq, ConstantSet, Rational, Word};

#[derive(Clone, Debug)]
pub struct SearchBounds {
    pub max_word_length: usize,
    pub labels: Vec<Rational>,
    /// Longest prefix and longest loop considered.
    pub max_steps: usize,
    pub max_configs: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_word_length: 3,
            labels: (1..=3).map(Rational::integer).collect(),
            max_steps: 64,
            max_configs: 10_000,
        }
    }
}

/// All words of length at most `len` over `labels`, in lex order.
pub fn words_up_to(len: usize, labels: &[Rational]) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..len {
        layer = layer.iter().flat_map(|w| labels.iter().map(move |l| w.child(l.clone()))).collect();
        out.extend(layer.iter().cloned());
    }
    out.sort();
    out.dedup();
    out
}

struct Universe {
    words: Vec<Word>,
    pref: Vec<bool>,
    lex: Vec<bool>,
    consts: Vec<usize>,
}

impl Universe {
    fn new(b: &SearchBounds, constants: &ConstantSet) -> Universe {
        let mut words = words_up_to(b.max_word_length, &b.labels);
        words.extend(constants.values().cloned());
        words.sort();
        words.dedup();
        let n = words.len();
        let mut pref = vec![false; n * n];
        let mut lex = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                pref[i * n + j] = prefix_leq(&words[i], &words[j]);
                lex[i * n + j] = lex_leq(&words[i], &words[j]);
            }
        }
        let consts = constants.values().map(|c| words.binary_search(c).expect("constant in universe")).collect();
        Universe { words, pref, lex, consts }
    }

    fn eval(&self, g: &Guard, x: &[usize], y: &[usize]) -> bool {
        let term = |t: &Term| match *t {
            Term::X(i) => x[i],
            Term::Y(i) => y[i],
            Term::Const(c) => self.consts[c],
        };
        match g {
            Guard::True => true,
            Guard::False => false,
            Guard::Atom { rel, a, b, neg } => {
                let (i, j) = (term(a), term(b));
                let n = self.words.len();
                let v = match rel {
                    Rel::Eq => i == j,
                    Rel::Pref => self.pref[i * n + j],
                    Rel::Lex => self.lex[i * n + j],
                };
                v != *neg
            }
            Guard::And(gs) => gs.iter().all(|g| self.eval(g, x, y)),
            Guard::Or(gs) => gs.iter().any(|g| self.eval(g, x, y)),
        }
    }
}

fn decode(mut id: usize, n: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(n) {
        *slot = id % base;
        id /= base;
    }
}

fn path(parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while let Some(p) = parent[v] {
        out.push(p);
        v = p;
    }
    out.reverse();
    out
}

/// Searches an exact-repetition lasso among configurations whose values are
/// words of the bounded universe. A result is a genuine witness; absence of
/// a result proves nothing.
pub fn bounded_emptiness(a: &ConstraintAutomaton, b: &SearchBounds) -> Option<Certificate> {
    let u = Universe::new(b, &a.constants);
    let n = a.dim;
    let base = u.words.len();
    let tuples = base.checked_pow(n as u32)?;
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut index: Vec<usize> = vec![usize::MAX; tuples.checked_mul(a.states.len())?];
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    'seed: for &i in &a.initial {
        for t in 0..tuples {
            if nodes.len() >= b.max_configs {
                break 'seed;
            }
            index[i * tuples + t] = nodes.len();
            queue.push_back(nodes.len());
            nodes.push((i, t));
            parent.push(None);
            depth.push(0);
        }
    }
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let (mut x, mut y) = (vec![0; n], vec![0; n]);
    while let Some(v) = queue.pop_front() {
        let (q, t) = nodes[v];
        decode(t, n, base, &mut x);
        for tr in a.transitions.iter().filter(|tr| tr.from == q) {
            for s in 0..tuples {
                decode(s, n, base, &mut y);
                if !u.eval(&tr.guard, &x, &y) {
                    continue;
                }
                let key = (tr.to, s);
                let w = match index[tr.to * tuples + s] {
                    w if w != usize::MAX => w,
                    _ if nodes.len() < b.max_configs && depth[v] < b.max_steps => {
                        let w = nodes.len();
                        index[tr.to * tuples + s] = w;
                        nodes.push(key);
                        parent.push(Some(v));
                        depth.push(depth[v] + 1);
                        edges.push(Vec::new());
                        queue.push_back(w);
                        w
                    }
                    _ => continue,
                };
                edges[v].push(w);
            }
        }
        edges[v].sort_unstable();
        edges[v].dedup();
    }
    let (comp, cyclic) = components(&edges);
    let hit = (0..nodes.len()).find(|&v| a.is_final(nodes[v].0) && cyclic[comp[v]])?;
    // Shortest loop through `hit` inside its component.
    let mut back: Vec<Option<usize>> = vec![None; nodes.len()];
    let mut seen = vec![false; nodes.len()];
    let mut queue = VecDeque::from([hit]);
    let mut last = None;
    while let Some(v) = queue.pop_front() {
        if edges[v].binary_search(&hit).is_ok() {
            last = Some(v);
            break;
        }
        for &w in &edges[v] {
            if comp[w] == comp[hit] && !seen[w] && w != hit {
                seen[w] = true;
                back[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    let mut cycle = path(&back, last?);
    cycle.push(hit);
    let config = |v: usize| {
        let mut vals = vec![0; n];
        decode(nodes[v].1, n, base, &mut vals);
        Configuration::new(nodes[v].0, vals.iter().map(|&i| u.words[i].clone()).collect())
    };
    Some(Certificate {
        prefix_run: path(&parent, hit).into_iter().map(config).collect(),
        loop_run: cycle.into_iter().map(config).collect(),
    })
}

/// Pair types of all tuple pairs over a bounded universe, for witness-based
/// composition.
pub struct PairTable {
    tuples: usize,
    class_of: Vec<u32>,
    class_id: HashMap<OrderType, u32>,
    classes: Vec<OrderType>,
    /// Per class: second tuples reachable from each first tuple.
    successors: Vec<HashMap<u32, Vec<u32>>>,
}

impl PairTable {
    pub fn new(dim: usize, b: &SearchBounds, constants: &ConstantSet) -> PairTable {
        let u = Universe::new(b, constants);
        let base = u.words.len();
        let tuples = base.pow(dim as u32);
        let values: Vec<Vec<Word>> = (0..tuples)
            .map(|t| {
                let mut idx = vec![0; dim];
                decode(t, dim, base, &mut idx);
                idx.iter().map(|&i| u.words[i].clone()).collect()
            })
            .collect();
        let mut class_of = vec![0; tuples * tuples];
        let mut class_id = HashMap::new();
        let mut classes = Vec::new();
        let mut successors: Vec<HashMap<u32, Vec<u32>>> = Vec::new();
        for s in 0..tuples {
            for t in 0..tuples {
                let ty = typ_pair(&values[s], &values[t], constants);
                let id = *class_id.entry(ty.clone()).or_insert_with(|| {
                    classes.push(ty);
                    successors.push(HashMap::new());
                    classes.len() as u32 - 1
                });
                class_of[s * tuples + t] = id;
                successors[id as usize].entry(s as u32).or_default().push(t as u32);
            }
        }
        PairTable { tuples, class_of, class_id, classes, successors }
    }

    /// Pair types witnessed inside the universe.
    pub fn witnessed(&self) -> &[OrderType] {
        &self.classes
    }

    /// All composite types witnessed by triples inside the universe.
    pub fn compose(&self, t1: &RunType, t2: &RunType) -> Vec<RunType> {
        if t1.to != t2.from {
            return Vec::new();
        }
        let (Some(&c1), Some(&c2)) = (self.class_id.get(&t1.pi), self.class_id.get(&t2.pi)) else {
            return Vec::new();
        };
        let mut found = BTreeSet::new();
        for (&s, mids) in &self.successors[c1 as usize] {
            for m in mids {
                let Some(ends) = self.successors[c2 as usize].get(m) else { continue };
                for &e in ends {
                    found.insert(self.class_of[s as usize * self.tuples + e as usize]);
                }
            }
        }
        found
            .into_iter()
            .map(|c| RunType { from: t1.from, pi: self.classes[c as usize].clone(), to: t2.to })
            .collect()
    }
}

/// Composite types of `t1` then `t2` witnessed by concrete triples within
/// the bounds; a subset of the algebraic composition.
pub fn brute_compose(t1: &RunType, t2: &RunType, b: &SearchBounds, constants: &ConstantSet) -> Vec<RunType> {
    if t1.to != t2.from {
        return Vec::new();
    }
    PairTable::new(t1.pi.dim(), b, constants).compose(t1, t2)
}

/// Size bounds for random instances.
#[derive(Clone, Debug)]
pub struct Profile {
    pub max_dim: usize,
    pub max_states: usize,
    /// User constants before prefix closure.
    pub max_constants: usize,
    pub max_atoms: usize,
    pub labels: Vec<i64>,
    pub max_constant_length: usize,
}

impl Default for Profile {
    fn default() -> Self {
        Profile { max_dim: 2, max_states: 3, max_constants: 1, max_atoms: 3, labels: vec![1, 2, 3], max_constant_length: 2 }
    }
}

pub fn random_word(rng: &mut impl Rng, max_len: usize, labels: &[i64]) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::ints(&(0..len).map(|_| *labels.choose(rng).expect("labels")).collect::<Vec<_>>())
}

pub fn random_constants(rng: &mut impl Rng, p: &Profile) -> ConstantSet {
    let k = rng.gen_range(0..=p.max_constants);
    let mut entries: Vec<(String, Word)> = Vec::new();
    while entries.len() < k {
        let len = rng.gen_range(1..=p.max_constant_length.max(1));
        let w = Word::ints(&(0..len).map(|_| *p.labels.choose(rng).expect("labels")).collect::<Vec<_>>());
        if entries.iter().all(|(_, v)| *v != w) {
            entries.push((format!("c{}", entries.len() + 1), w));
        }
    }
    ConstantSet::closed(entries).expect("generated constants are valid")
}

fn random_term(rng: &mut impl Rng, dim: usize, constants: &ConstantSet) -> Term {
    let options = 2 * dim + constants.len();
    let k = rng.gen_range(0..options);
    if k < dim {
        Term::X(k)
    } else if k < 2 * dim {
        Term::Y(k - dim)
    } else {
        Term::Const(k - 2 * dim)
    }
}

pub fn random_guard(rng: &mut impl Rng, dim: usize, constants: &ConstantSet, max_atoms: usize) -> Guard {
    let atoms = rng.gen_range(1..=max_atoms.max(1));
    let mut g: Option<Guard> = None;
    for _ in 0..atoms {
        let rel = [Rel::Eq, Rel::Pref, Rel::Lex][rng.gen_range(0..3)];
        let a = random_term(rng, dim, constants);
        let b = random_term(rng, dim, constants);
        let mut atom = Guard::atom(rel, a, b);
        if rng.gen_bool(0.3) {
            atom = atom.negate();
        }
        g = Some(match g {
            None => atom,
            Some(prev) if rng.gen_bool(0.7) => Guard::and(vec![prev, atom]),
            Some(prev) => Guard::or(vec![prev, atom]),
        });
    }
    g.unwrap_or(Guard::True)
}

pub fn random_automaton(rng: &mut impl Rng, p: &Profile) -> ConstraintAutomaton {
    let dim = rng.gen_range(1..=p.max_dim.max(1));
    let constants = random_constants(rng, p);
    let k = rng.gen_range(1..=p.max_states.max(1));
    let states: Vec<String> = (0..k).map(|i| format!("q{i}")).collect();
    let pick = |rng: &mut dyn rand::RngCore| -> Vec<usize> {
        let mut s: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.5)).collect();
        if s.is_empty() {
            s.push(rng.gen_range(0..k));
        }
        s
    };
    let initial = pick(rng);
    let finals = pick(rng);
    let mut transitions = Vec::new();
    for from in 0..k {
        for to in 0..k {
            if from == to || rng.gen_bool(0.5) {
                let guard = random_guard(rng, dim, &constants, p.max_atoms);
                transitions.push(Transition { from, to, guard });
            }
        }
    }
    ConstraintAutomaton::new(dim, constants, states, initial, finals, transitions).expect("generated automaton is valid")
}

/// A reproducible stream of random automata.
fn random_lterm(rng: &mut impl Rng, dim: usize, constants: &ConstantSet) -> LTerm {
    match random_term(rng, dim, constants) {
        Term::X(i) => LTerm::var(i),
        Term::Y(i) => LTerm::next(i),
        Term::Const(c) => LTerm::Const(c),
    }
}

/// A random formula with term exponents at most one and temporal nesting at
/// most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, dim: usize, constants: &ConstantSet, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_literal(rng, dim, constants);
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        0 => Formula::not(random_formula(rng, dim, constants, d)),
        1 => Formula::and(random_formula(rng, dim, constants, d), random_formula(rng, dim, constants, d)),
        2 => Formula::or(random_formula(rng, dim, constants, d), random_formula(rng, dim, constants, d)),
        3 => Formula::next(random_formula(rng, dim, constants, d)),
        4 => Formula::globally(random_formula(rng, dim, constants, d)),
        5 => Formula::finally(random_formula(rng, dim, constants, d)),
        6 => Formula::until(random_formula(rng, dim, constants, d), random_formula(rng, dim, constants, d)),
        7 => Formula::release(random_formula(rng, dim, constants, d), random_formula(rng, dim, constants, d)),
        _ => Formula::and(random_literal(rng, dim, constants), random_formula(rng, dim, constants, d)),
    }
}

fn random_literal<R: Rng>(rng: &mut R, dim: usize, constants: &ConstantSet) -> Formula {
    let rel = [Rel::Eq, Rel::Pref, Rel::Lex][rng.gen_range(0..3)];
    let a = random_lterm(rng, dim, constants);
    let b = random_lterm(rng, dim, constants);
    let atom = Formula::atom(rel, a, b);
    if rng.gen_bool(0.3) {
        Formula::not(atom)
    } else {
        atom
    }
}

pub struct Instances {
    rng: ChaCha8Rng,
    profile: Profile,
}

pub fn random_instances(seed: u64, profile: Profile) -> Instances {
    Instances { rng: ChaCha8Rng::seed_from_u64(seed), profile }
}

impl Instances {
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl Iterator for Instances {
    type Item = ConstraintAutomaton;

    fn next(&mut self) -> Option<ConstraintAutomaton> {
        Some(random_automaton(&mut self.rng, &self.profile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_guard;

    fn single(guard: &str) -> ConstraintAutomaton {
        let c = ConstantSet::default();
        let g = parse_guard(guard, &c).unwrap();
        ConstraintAutomaton::new(1, c, vec!["q".into()], vec![0], vec![0], vec![Transition { from: 0, to: 0, guard: g }])
            .unwrap()
    }

    #[test]
    fn lasso_examples() {
        let b = SearchBounds::default();
        let lasso = bounded_emptiness(&single("eq(x1,y1)"), &b).unwrap();
        assert_eq!(lasso.loop_run.first(), lasso.loop_run.last());
        assert!(bounded_emptiness(&single("pref(y1,x1) & !eq(x1,y1)"), &b).is_none());
        assert!(bounded_emptiness(&single("pref(x1,y1) & !eq(x1,y1)"), &b).is_none());
    }

    #[test]
    fn universe_size() {
        assert_eq!(words_up_to(3, &SearchBounds::default().labels).len(), 40);
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<_> = random_instances(7, Profile::default()).take(5).collect();
        let b: Vec<_> = random_instances(7, Profile::default()).take(5).collect();
        assert_eq!(a, b);
    }
}
