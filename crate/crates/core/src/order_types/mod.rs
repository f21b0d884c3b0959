//! Order types: canonical encodings of maximal-common-ancestor trees (MCATs)
//! marked with constants and tuple positions, and the algebra built on them.
//!
//! A type is stored as a preorder arena. Children of a node are in
//! lexicographic order, so the preorder sequence of `(parent, constants,
//! marks)` is canonical and structural equality is type equality.

mod enumerate;
mod realize;
mod stretch;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::tree::{gcp, prefix_leq, ConstantSet, Word};

pub use enumerate::{
    compose_pairs, enumerate_types, extend_positions, identity_pair, skeleton, Budget, Composite, PNode,
    Shape, ShapeIndex, ROOT,
};
pub use realize::{
    extend_realization, has_gaps, insert_gap_all, realize, realize_extending, realize_with_gaps, regap,
};
pub use stretch::{stretch_leq, stretch_upper_bound};

pub const NO_PARENT: u32 = u32::MAX;
const DEFAULT_CEILING: u64 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OrderTypeError {
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("type enumeration exceeded the ceiling of {0} candidate placements")]
    ResourceLimit(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("type too large for the packed encoding: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// The configured ceiling on candidate placements during enumeration and
/// composition; `TREELTL_TYPE_CEILING` overrides the default of 10^6.
pub fn type_ceiling() -> u64 {
    static CEILING: OnceLock<u64> = OnceLock::new();
    *CEILING.get_or_init(|| {
        std::env::var("TREELTL_TYPE_CEILING")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_CEILING)
    })
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TypeNode {
    pub parent: u32,
    pub consts: Vec<u16>,
    pub marks: Vec<u16>,
}

/// The isomorphism type of an MCAT over `arity` marked positions, grouped
/// into tuples of `dim` positions each (one group for configurations, two
/// for pair types of steps, three during composition).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderType {
    dim: u16,
    arity: u16,
    nodes: Vec<TypeNode>,
    // Derived from `nodes`.
    pos: Vec<u32>,
    end: Vec<u32>,
    depth: Vec<u16>,
}

impl OrderType {
    pub(crate) fn from_nodes(dim: usize, arity: usize, nodes: Vec<TypeNode>) -> OrderType {
        let n = nodes.len();
        let mut pos = vec![NO_PARENT; arity];
        let mut end: Vec<u32> = (1..=n as u32).collect();
        let mut depth = vec![0u16; n];
        for (i, node) in nodes.iter().enumerate() {
            for &m in &node.marks {
                pos[m as usize] = i as u32;
            }
            if node.parent != NO_PARENT {
                depth[i] = depth[node.parent as usize] + 1;
            }
        }
        for i in (1..n).rev() {
            let p = nodes[i].parent as usize;
            end[p] = end[p].max(end[i]);
        }
        debug_assert!(pos.iter().all(|&p| p != NO_PARENT), "unmarked position");
        OrderType { dim: dim as u16, arity: arity as u16, nodes, pos, end, depth }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn groups(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.arity() / self.dim()
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TypeNode] {
        &self.nodes
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.nodes[v].parent;
        (p != NO_PARENT).then_some(p as usize)
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (v + 1..self.end[v] as usize).filter(|&c| self.nodes[c].parent as usize == v).collect()
    }

    /// Node holding tuple position `p`.
    pub fn node_of(&self, p: usize) -> usize {
        self.pos[p] as usize
    }

    /// Node holding constant `c`, if the constant occurs in this type.
    pub fn const_node(&self, c: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.consts.contains(&(c as u16)))
    }

    /// `a ⪯ b` on nodes.
    pub fn ancestor_eq(&self, a: usize, b: usize) -> bool {
        a <= b && b < self.end[a] as usize
    }

    /// `a ⊑ b` on nodes (preorder is the lexicographic order).
    pub fn lex_le(&self, a: usize, b: usize) -> bool {
        a <= b
    }

    pub fn is_constant(&self, v: usize) -> bool {
        !self.nodes[v].consts.is_empty()
    }

    /// Positions of group `g`.
    pub fn group_positions(&self, g: usize) -> Vec<usize> {
        let d = self.dim();
        (g * d..(g + 1) * d).collect()
    }

    /// Projection onto the listed positions, renumbered in list order. Returns
    /// the projected type and, per projected node, the node it came from.
    pub fn project(&self, positions: &[usize], dim: usize) -> (OrderType, Vec<usize>) {
        let n = self.nodes.len();
        let mut sel = vec![u16::MAX; self.arity()];
        for (i, &p) in positions.iter().enumerate() {
            sel[p] = i as u16;
        }
        let own: Vec<bool> = self
            .nodes
            .iter()
            .map(|nd| !nd.consts.is_empty() || nd.marks.iter().any(|&m| sel[m as usize] != u16::MAX))
            .collect();
        let mut content = own.clone();
        let mut busy = vec![0u32; n];
        for i in (1..n).rev() {
            let p = self.nodes[i].parent as usize;
            if content[i] {
                content[p] = true;
                busy[p] += 1;
            }
        }
        let keep: Vec<bool> = (0..n).map(|i| i == 0 || own[i] || busy[i] >= 2).collect();
        let mut new_index = vec![NO_PARENT; n];
        let mut origin = Vec::new();
        let mut nodes = Vec::new();
        for i in 0..n {
            if !keep[i] {
                continue;
            }
            let mut p = self.nodes[i].parent;
            while p != NO_PARENT && !keep[p as usize] {
                p = self.nodes[p as usize].parent;
            }
            let parent = if p == NO_PARENT { NO_PARENT } else { new_index[p as usize] };
            let mut marks: Vec<u16> = self.nodes[i]
                .marks
                .iter()
                .filter_map(|&m| (sel[m as usize] != u16::MAX).then_some(sel[m as usize]))
                .collect();
            marks.sort_unstable();
            new_index[i] = nodes.len() as u32;
            origin.push(i);
            nodes.push(TypeNode { parent, consts: self.nodes[i].consts.clone(), marks });
        }
        (OrderType::from_nodes(dim, positions.len(), nodes), origin)
    }

    /// Restriction of a grouped type to group `g`.
    pub fn restrict(&self, g: usize) -> (OrderType, Vec<usize>) {
        self.project(&self.group_positions(g), self.dim())
    }

    pub fn first(&self) -> OrderType {
        self.restrict(0).0
    }

    pub fn second(&self) -> OrderType {
        self.restrict(1).0
    }

    /// Renders the canonical text form, e.g. `({$c}({x1,y1}))`.
    pub fn render(&self, constants: Option<&ConstantSet>) -> String {
        let mut out = String::new();
        self.render_node(0, constants, &mut out);
        out
    }

    fn render_node(&self, v: usize, constants: Option<&ConstantSet>, out: &mut String) {
        out.push_str("({");
        let mut items: Vec<String> = Vec::new();
        for &m in &self.nodes[v].marks {
            items.push(self.position_name(m as usize));
        }
        for &c in &self.nodes[v].consts {
            match constants {
                Some(cs) if (c as usize) < cs.len() => items.push(format!("${}", cs.name(c as usize))),
                _ => items.push(format!("$#{c}")),
            }
        }
        out.push_str(&items.join(","));
        out.push('}');
        for c in self.children(v) {
            self.render_node(c, constants, out);
        }
        out.push(')');
    }

    fn position_name(&self, p: usize) -> String {
        let d = self.dim().max(1);
        let (g, i) = (p / d, p % d + 1);
        match g {
            0 => format!("x{i}"),
            1 => format!("y{i}"),
            2 => format!("z{i}"),
            _ => format!("p{g}_{i}"),
        }
    }

    /// The identity pairing `typ(w̄, w̄)` of a single-group type.
    pub fn doubled(&self) -> OrderType {
        let n = self.arity() as u16;
        let nodes = self
            .nodes
            .iter()
            .map(|nd| {
                let mut marks = nd.marks.clone();
                marks.extend(nd.marks.iter().map(|m| m + n));
                marks.sort_unstable();
                TypeNode { parent: nd.parent, consts: nd.consts.clone(), marks }
            })
            .collect();
        OrderType::from_nodes(self.dim(), 2 * self.arity(), nodes)
    }
}

impl fmt::Display for OrderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

impl fmt::Debug for OrderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

/// A concrete MCAT: node words in preorder together with their type.
#[derive(Clone, Debug)]
pub struct Mcat {
    pub words: Vec<Word>,
    pub ty: OrderType,
}

impl Mcat {
    /// Word of tuple position `p`.
    pub fn position_word(&self, p: usize) -> &Word {
        &self.words[self.ty.node_of(p)]
    }
}

/// The MCAT of `values` together with all constants, typed with tuples of
/// `dim` positions.
pub fn mcat(values: &[Word], dim: usize, constants: &ConstantSet) -> Mcat {
    let mut set: Vec<Word> = Vec::with_capacity(2 * (values.len() + constants.len()) + 1);
    set.push(Word::empty());
    set.extend(values.iter().cloned());
    set.extend(constants.values().cloned());
    set.sort();
    set.dedup();
    // In a tree, closing under meets of lex-adjacent elements closes under
    // all meets.
    let meets: Vec<Word> = set.windows(2).map(|p| gcp(&p[0], &p[1])).collect();
    set.extend(meets);
    set.sort();
    set.dedup();

    let index: HashMap<&Word, usize> = set.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut nodes: Vec<TypeNode> = Vec::with_capacity(set.len());
    let mut stack: Vec<usize> = Vec::new();
    for (i, w) in set.iter().enumerate() {
        while let Some(&top) = stack.last() {
            if prefix_leq(&set[top], w) {
                break;
            }
            stack.pop();
        }
        let parent = stack.last().map_or(NO_PARENT, |&p| p as u32);
        nodes.push(TypeNode { parent, consts: Vec::new(), marks: Vec::new() });
        stack.push(i);
    }
    for (ci, c) in constants.values().enumerate() {
        nodes[index[c]].consts.push(ci as u16);
    }
    for (p, v) in values.iter().enumerate() {
        nodes[index[v]].marks.push(p as u16);
    }
    for nd in &mut nodes {
        nd.consts.sort_unstable();
    }
    Mcat { words: set, ty: OrderType::from_nodes(dim, values.len(), nodes) }
}

/// `typ_C(w̄)`.
pub fn typ(values: &[Word], constants: &ConstantSet) -> OrderType {
    mcat(values, values.len(), constants).ty
}

/// `typ_C(w̄, v̄)` with the role split first/second.
pub fn typ_pair(w: &[Word], v: &[Word], constants: &ConstantSet) -> OrderType {
    assert_eq!(w.len(), v.len(), "pair arities differ");
    let all: Vec<Word> = w.iter().chain(v).cloned().collect();
    mcat(&all, w.len(), constants).ty
}

/// The induced isomorphism of a pair type with equal restrictions, as a map
/// from nodes of the first restriction to nodes of the second, both given as
/// nodes of the pair type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedIso {
    pub mapping: Vec<(usize, usize)>,
}

pub fn induced_iso(t: &OrderType) -> Result<InducedIso, OrderTypeError> {
    let (a, oa) = t.restrict(0);
    let (b, ob) = t.restrict(1);
    if a != b {
        return Err(OrderTypeError::TypeMismatch(
            "first and second restrictions differ".to_string(),
        ));
    }
    Ok(InducedIso { mapping: oa.into_iter().zip(ob).collect() })
}

/// Whether a loop of type `t` is noncontracting.
pub fn is_noncontracting(t: &OrderType) -> Result<bool, OrderTypeError> {
    let iso = induced_iso(t)?;
    let strict = |a: usize, b: usize| a != b && t.ancestor_eq(a, b);
    for &(d, hd) in &iso.mapping {
        if strict(hd, d) {
            return Ok(false);
        }
    }
    for &(e, he) in &iso.mapping {
        if he != e {
            continue;
        }
        for &(d, hd) in &iso.mapping {
            if strict(d, e) && strict(d, hd) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A configuration: a state index and a tuple of data values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub values: Vec<Word>,
}

impl Configuration {
    pub fn new(state: usize, values: Vec<Word>) -> Configuration {
        Configuration { state, values }
    }

    pub fn map_values(&self, f: impl Fn(&Word) -> Word) -> Configuration {
        Configuration { state: self.state, values: self.values.iter().map(f).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn none() -> ConstantSet {
        ConstantSet::default()
    }

    #[test]
    fn mcat_nodes() {
        let m = mcat(&[w("1.2"), w("1.3")], 2, &none());
        assert_eq!(m.words, vec![w("eps"), w("1"), w("1.2"), w("1.3")]);
        let m = mcat(&[w("1")], 1, &none());
        assert_eq!(m.words, vec![w("eps"), w("1")]);
        assert_eq!(m.ty.node_of(0), 1);
        let c = ConstantSet::closed(vec![("c".into(), w("1"))]).unwrap();
        let m = mcat(&[w("eps")], 1, &c);
        assert_eq!(m.words.len(), 2);
        assert_eq!(m.ty.node_of(0), 0);
    }

    #[test]
    fn pair_types() {
        let same = typ_pair(&[w("1")], &[w("1")], &none());
        assert_eq!(same.len(), 2);
        assert_eq!(same.node_of(0), same.node_of(1));
        let inc = typ_pair(&[w("1")], &[w("2")], &none());
        assert_eq!(inc.len(), 3);
        assert!(inc.lex_le(inc.node_of(0), inc.node_of(1)));
        assert!(!inc.ancestor_eq(inc.node_of(0), inc.node_of(1)));
        let below = typ_pair(&[w("1")], &[w("1.1")], &none());
        assert!(below.ancestor_eq(below.node_of(0), below.node_of(1)));
        assert_ne!(below.node_of(0), 0);
        assert_eq!(below.render(None), "({}({x1}({y1})))");
    }

    #[test]
    fn relabeling_keeps_type() {
        let a = typ_pair(&[w("1.5"), w("3")], &[w("1.5.2"), w("1.7")], &none());
        let b = typ_pair(&[w("2.-1"), w("9/2")], &[w("2.-1.0"), w("2.8")], &none());
        assert_eq!(a, b);
    }

    #[test]
    fn iso_and_contracting() {
        let t = typ_pair(&[w("1")], &[w("1.1")], &none());
        let iso = induced_iso(&t).unwrap();
        assert_eq!(iso.mapping, vec![(0, 0), (1, 2)]);
        assert!(is_noncontracting(&t).unwrap());
        let t = typ_pair(&[w("1.1")], &[w("1")], &none());
        assert!(!is_noncontracting(&t).unwrap());
        // With prefix-closed constants, "1" and "1.1" are both constants.
        let c = ConstantSet::closed(vec![("c".into(), w("1.1.1"))]).unwrap();
        let t = typ_pair(&[w("1")], &[w("1.1")], &c);
        assert!(is_noncontracting(&t).is_err());
        // A fixed point e below a node that moves down.
        let t = typ_pair(&[w("1"), w("1.1.1")], &[w("1.1"), w("1.1.1")], &none());
        assert!(!is_noncontracting(&t).unwrap());
        let t = typ_pair(&[w("1")], &[w("2")], &none());
        let iso = induced_iso(&t).unwrap();
        assert_eq!(iso.mapping, vec![(0, 0), (1, 2)]);
        let bad = typ_pair(&[w("eps")], &[w("1")], &none());
        assert!(matches!(induced_iso(&bad), Err(OrderTypeError::TypeMismatch(_))));
    }

    #[test]
    fn projection_drops_dangling_meets() {
        let t = typ_pair(&[w("1.1")], &[w("1.2")], &none());
        assert_eq!(t.len(), 4);
        let (x, origin) = t.restrict(0);
        assert_eq!(x, typ(&[w("1")], &none()));
        assert_eq!(origin, vec![0, 2]);
        assert_eq!(t.doubled().len(), 4);
    }
}
