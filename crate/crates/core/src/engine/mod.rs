//! Emptiness of constraint automata via order types.
//!
//! The search runs in two phases. First, reachability over pairs (state,
//! configuration type), seeded with every type at every initial state. Then,
//! for each reachable final pair on a cycle, a search over (state, type of
//! the start and current configuration) for a noncontracting loop back to
//! that pair. Successors are generated by inserting the next tuple into the
//! current type under the transition guard; this computes exactly the
//! products with one-step types, restricted to what is reachable.

mod certificate;
mod saturate;
mod stretchify;

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::automata::{AutomatonError, ConstraintAutomaton, Guard};
use crate::order_types::{extend_positions, is_noncontracting, skeleton, Budget, OrderTypeError, Shape};

use certificate::build_certificate;
pub use certificate::{
    certificate_from_json, certificate_to_json, check_certificate, lift_run,
    Certificate, Direction,
};
pub use saturate::saturate;
pub use stretchify::{stretchify, StretchReport};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Types(#[from] OrderTypeError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl EngineError {
    /// Whether the error is a resource-ceiling abort.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            EngineError::Types(OrderTypeError::ResourceLimit(_) | OrderTypeError::TooLarge(_))
                | EngineError::Automaton(AutomatonError::Types(
                    OrderTypeError::ResourceLimit(_) | OrderTypeError::TooLarge(_)
                ))
        )
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EngineOptions {
    /// Search loop candidates in parallel.
    pub parallel: bool,
}

#[derive(Clone, Debug, Default)]
pub struct EngineStats {
    pub single_types: usize,
    pub reach_nodes: usize,
    pub loop_candidates: usize,
    pub pair_nodes: usize,
    pub placements: u64,
    pub stretch_steps: usize,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub nonempty: bool,
    pub certificate: Option<Certificate>,
    pub stats: EngineStats,
}

/// A step of the reachability phase: the pair type of the step.
#[derive(Clone, Debug)]
pub(crate) struct ReachStep {
    pub(crate) state: usize,
    pub(crate) pair: Shape,
}

/// A step of the loop phase: the type of (start, previous, next).
#[derive(Clone, Debug)]
pub(crate) struct LoopStep {
    pub(crate) state: usize,
    pub(crate) triple: Shape,
}

/// A symbolic witness of nonemptiness.
#[derive(Clone, Debug)]
pub(crate) struct Witness {
    pub(crate) seed_state: usize,
    pub(crate) seed: Shape,
    pub(crate) prefix: Vec<ReachStep>,
    pub(crate) final_state: usize,
    pub(crate) junction: Shape,
    pub(crate) lasso: Vec<LoopStep>,
}

struct Search<'a> {
    a: &'a ConstraintAutomaton,
    n: usize,
    guards: Vec<Guard>,
    guard_of: Vec<usize>,
}

fn positions(range: std::ops::Range<usize>) -> Vec<usize> {
    range.collect()
}

impl<'a> Search<'a> {
    fn new(a: &'a ConstraintAutomaton) -> Search<'a> {
        let mut guards: Vec<Guard> = Vec::new();
        let mut guard_of = Vec::new();
        for t in &a.transitions {
            let id = guards.iter().position(|g| *g == t.guard).unwrap_or_else(|| {
                guards.push(t.guard.clone());
                guards.len() - 1
            });
            guard_of.push(id);
        }
        Search { a, n: a.dim, guards, guard_of }
    }

    /// Inserts a new tuple at positions `base + n ..` into `start`, reading
    /// the guard's `x̄` at `base` and `ȳ` at `base + n`.
    fn extend(
        &self,
        start: &Shape,
        base: usize,
        guard: usize,
        placements: &mut u64,
    ) -> Result<Vec<Shape>, EngineError> {
        let g = &self.guards[guard];
        let n = self.n;
        if n == 0 {
            let ok = g.eval_shape(&start.index(), base, base) == Some(true);
            return Ok(if ok { vec![start.clone()] } else { Vec::new() });
        }
        let mut budget = Budget::default();
        let out = extend_positions(start, base + n, n, &mut budget, |s, j| {
            let v = g.eval_shape(&s.index(), base, base + n);
            if j + 1 == n {
                v == Some(true)
            } else {
                v != Some(false)
            }
        })?;
        *placements += budget.used();
        Ok(out)
    }
}

pub(crate) struct ReachGraph {
    pub(crate) singles: Vec<Shape>,
    single_id: HashMap<Shape, usize>,
    /// Nodes (state, single type id) in discovery order.
    pub(crate) nodes: Vec<(usize, usize)>,
    node_id: HashMap<(usize, usize), usize>,
    /// Discovery edge per node: (predecessor node, pair shape).
    parent: Vec<Option<(usize, Shape)>>,
    edges: Vec<Vec<usize>>,
}

impl ReachGraph {
    fn path_to(&self, mut v: usize) -> (usize, Vec<ReachStep>) {
        let mut steps = Vec::new();
        while let Some((u, pair)) = &self.parent[v] {
            steps.push(ReachStep { state: self.nodes[v].0, pair: pair.clone() });
            v = *u;
        }
        steps.reverse();
        (v, steps)
    }
}

fn reach(s: &Search, stats: &mut EngineStats) -> Result<ReachGraph, EngineError> {
    let n = s.n;
    let mut budget = Budget::default();
    let singles = extend_positions(&skeleton(&s.a.constants)?, 0, n, &mut budget, |_, _| true)?;
    stats.placements += budget.used();
    let single_id: HashMap<Shape, usize> = singles.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut g = ReachGraph {
        singles,
        single_id,
        nodes: Vec::new(),
        node_id: HashMap::new(),
        parent: Vec::new(),
        edges: Vec::new(),
    };
    let mut queue = VecDeque::new();
    for &i in &s.a.initial {
        for t in 0..g.singles.len() {
            let id = g.nodes.len();
            g.nodes.push((i, t));
            g.node_id.insert((i, t), id);
            g.parent.push(None);
            g.edges.push(Vec::new());
            queue.push_back(id);
        }
    }
    let mut cache: HashMap<(usize, usize), Vec<(Shape, usize)>> = HashMap::new();
    let second = positions(n..2 * n);
    while let Some(v) = queue.pop_front() {
        let (q, t) = g.nodes[v];
        for (ti, tr) in s.a.transitions.iter().enumerate() {
            if tr.from != q {
                continue;
            }
            let gid = s.guard_of[ti];
            if !cache.contains_key(&(t, gid)) {
                let pairs = s.extend(&g.singles[t], 0, gid, &mut stats.placements)?;
                let mut out = Vec::with_capacity(pairs.len());
                for p in pairs {
                    let next = g.single_id[&p.project(&second)];
                    out.push((p, next));
                }
                cache.insert((t, gid), out);
            }
            for (pair, next) in &cache[&(t, gid)] {
                let key = (tr.to, *next);
                let w = match g.node_id.get(&key) {
                    Some(&w) => w,
                    None => {
                        let w = g.nodes.len();
                        g.nodes.push(key);
                        g.node_id.insert(key, w);
                        g.parent.push(Some((v, pair.clone())));
                        g.edges.push(Vec::new());
                        queue.push_back(w);
                        w
                    }
                };
                if !g.edges[v].contains(&w) {
                    g.edges[v].push(w);
                }
            }
        }
    }
    stats.single_types = g.singles.len();
    stats.reach_nodes = g.nodes.len();
    Ok(g)
}

/// Strongly connected components (iterative Tarjan); returns the component
/// id per node and whether each component contains a cycle.
pub(crate) fn components(edges: &[Vec<usize>]) -> (Vec<usize>, Vec<bool>) {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut cyclic = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < edges[v].len() {
                let w = edges[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let id = cyclic.len();
                    let mut size = 0;
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = id;
                        size += 1;
                        if w == v {
                            break;
                        }
                    }
                    cyclic.push(size > 1 || edges[v].contains(&v));
                }
            }
        }
    }
    (comp, cyclic)
}

/// Searches a noncontracting loop from reach node `start` back to itself.
fn find_loop(
    s: &Search,
    g: &ReachGraph,
    comp: &[usize],
    start: usize,
    placements: &mut u64,
    pair_nodes: &mut usize,
) -> Result<Option<Vec<LoopStep>>, EngineError> {
    let n = s.n;
    let (f, tau) = g.nodes[start];
    let target = comp[start];
    let seed = g.singles[tau].doubled(n);
    let mut nodes: Vec<(usize, Shape)> = vec![(f, seed)];
    // The seed stands for the empty run and is not marked as seen, so that a
    // loop returning to the identity type is still discovered.
    let mut seen: HashMap<(usize, Shape), usize> = HashMap::new();
    let mut parent: Vec<Option<(usize, Shape)>> = vec![None];
    let mut queue = VecDeque::from([0usize]);
    let outer = positions(0..n).into_iter().chain(2 * n..3 * n).collect::<Vec<_>>();
    let newest = positions(2 * n..3 * n);
    let second = positions(n..2 * n);
    while let Some(v) = queue.pop_front() {
        let (q, pi) = nodes[v].clone();
        // Successor triples per guard, shared by transitions with equal guards.
        let mut cache: HashMap<usize, Vec<(Shape, usize)>> = HashMap::new();
        for (ti, tr) in s.a.transitions.iter().enumerate() {
            if tr.from != q {
                continue;
            }
            let gid = s.guard_of[ti];
            if !cache.contains_key(&gid) {
                let triples = s.extend(&pi, n, gid, placements)?;
                let out = triples
                    .into_iter()
                    .map(|t| {
                        let single = g.single_id[&t.project(&newest)];
                        (t, single)
                    })
                    .collect();
                cache.insert(gid, out);
            }
            for (triple, single) in &cache[&gid] {
                let Some(&r) = g.node_id.get(&(tr.to, *single)) else { continue };
                if comp[r] != target {
                    continue;
                }
                let outer_pi = triple.project(&outer);
                let key = (tr.to, outer_pi);
                if seen.contains_key(&key) {
                    continue;
                }
                let w = nodes.len();
                seen.insert(key.clone(), w);
                nodes.push(key.clone());
                parent.push(Some((v, triple.clone())));
                *pair_nodes += 1;
                if r == start && key.1.project(&second) == g.singles[tau] {
                    if n == 0 || is_noncontracting(&key.1.to_type(n, 2 * n))? {
                        let mut steps = Vec::new();
                        let mut u = w;
                        while let Some((p, t)) = &parent[u] {
                            steps.push(LoopStep { state: nodes[u].0, triple: t.clone() });
                            u = *p;
                        }
                        steps.reverse();
                        return Ok(Some(steps));
                    }
                }
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

/// Decides emptiness symbolically; returns a witness when nonempty.
pub(crate) fn search(
    a: &ConstraintAutomaton,
    opts: EngineOptions,
    stats: &mut EngineStats,
) -> Result<Option<Witness>, EngineError> {
    let s = Search::new(a);
    let g = reach(&s, stats)?;
    let (comp, cyclic) = components(&g.edges);
    let candidates: Vec<usize> = (0..g.nodes.len())
        .filter(|&v| a.is_final(g.nodes[v].0) && cyclic[comp[v]])
        .collect();
    stats.loop_candidates = candidates.len();
    let probe = |v: usize| -> Result<Option<(usize, Vec<LoopStep>, u64, usize)>, EngineError> {
        let mut placements = 0;
        let mut pair_nodes = 0;
        let found = find_loop(&s, &g, &comp, v, &mut placements, &mut pair_nodes)?;
        Ok(found.map(|l| (v, l, placements, pair_nodes)))
    };
    let found = if opts.parallel {
        candidates
            .par_iter()
            .map(|&v| probe(v))
            .find_map_first(|r| match r {
                Ok(None) => None,
                Ok(Some(x)) => Some(Ok(x)),
                Err(e) => Some(Err(e)),
            })
            .transpose()?
    } else {
        let mut hit = None;
        for &v in &candidates {
            if let Some(h) = probe(v)? {
                hit = Some(h);
                break;
            }
        }
        hit
    };
    let Some((v, lasso, placements, pair_nodes)) = found else { return Ok(None) };
    stats.placements += placements;
    stats.pair_nodes += pair_nodes;
    let (seed_node, prefix) = g.path_to(v);
    let (seed_state, seed_single) = g.nodes[seed_node];
    Ok(Some(Witness {
        seed_state,
        seed: g.singles[seed_single].clone(),
        prefix,
        final_state: g.nodes[v].0,
        junction: g.singles[g.nodes[v].1].clone(),
        lasso,
    }))
}

/// Decides whether `a` accepts some data word; nonempty verdicts carry a
/// certificate that has passed [`check_certificate`].
pub fn is_empty(a: &ConstraintAutomaton) -> Result<Verdict, EngineError> {
    is_empty_with(a, EngineOptions::default())
}

pub fn is_empty_with(a: &ConstraintAutomaton, opts: EngineOptions) -> Result<Verdict, EngineError> {
    let clock = Instant::now();
    let mut stats = EngineStats::default();
    let witness = search(a, opts, &mut stats)?;
    let certificate = match witness {
        None => None,
        Some(w) => {
            let (cert, steps) = build_certificate(a, &w)?;
            stats.stretch_steps = steps;
            if let Err(reason) = check_certificate(a, &cert) {
                return Err(EngineError::Internal(format!("certificate rejected: {reason}")));
            }
            Some(cert)
        }
    };
    stats.millis = clock.elapsed().as_millis();
    Ok(Verdict { nonempty: certificate.is_some(), certificate, stats })
}
