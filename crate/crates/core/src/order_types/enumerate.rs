//! Exhaustive enumeration of types by incremental insertion of positions,
//! and the symbolic type product.
//!
//! Enumeration works on [`Shape`], a packed preorder encoding with bitmask
//! marks, so that every candidate placement is a flat copy.

use std::collections::{BTreeMap, HashSet};

use super::{mcat, type_ceiling, OrderType, OrderTypeError, TypeNode, NO_PARENT};
use crate::tree::ConstantSet;

pub const ROOT: u8 = u8::MAX;
pub const MAX_SHAPE_NODES: usize = 254;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PNode {
    pub parent: u8,
    pub consts: u64,
    pub marks: u64,
}

/// A type in packed form: preorder nodes with lexicographically ordered
/// children, constants and positions as bitmasks (at most 64 of each).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Shape {
    pub nodes: Vec<PNode>,
}

/// Position and subtree lookups for a [`Shape`].
pub struct ShapeIndex {
    pub pos: Vec<u8>,
    pub end: Vec<u8>,
    pub cnode: Vec<u8>,
}

impl ShapeIndex {
    pub fn ancestor_eq(&self, a: usize, b: usize) -> bool {
        a <= b && b < self.end[a] as usize
    }
}

fn too_large(what: &str) -> OrderTypeError {
    OrderTypeError::TooLarge(what.to_string())
}

impl Shape {
    pub fn from_type(t: &OrderType) -> Result<Shape, OrderTypeError> {
        if t.len() > MAX_SHAPE_NODES || t.arity() > 64 {
            return Err(too_large("type too large for packed form"));
        }
        let mut nodes = Vec::with_capacity(t.len());
        for n in t.nodes() {
            let mut consts = 0u64;
            for &c in &n.consts {
                if c >= 64 {
                    return Err(too_large("more than 64 constants"));
                }
                consts |= 1 << c;
            }
            let marks = n.marks.iter().fold(0u64, |m, &p| m | 1 << p);
            let parent = if n.parent == NO_PARENT { ROOT } else { n.parent as u8 };
            nodes.push(PNode { parent, consts, marks });
        }
        Ok(Shape { nodes })
    }

    pub fn to_type(&self, dim: usize, arity: usize) -> OrderType {
        let nodes = self
            .nodes
            .iter()
            .map(|n| TypeNode {
                parent: if n.parent == ROOT { NO_PARENT } else { n.parent as u32 },
                consts: bits(n.consts),
                marks: bits(n.marks),
            })
            .collect();
        OrderType::from_nodes(dim, arity, nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn ends(&self) -> Vec<u8> {
        let n = self.nodes.len();
        let mut end: Vec<u8> = (1..=n as u8).collect();
        for i in (1..n).rev() {
            let p = self.nodes[i].parent as usize;
            end[p] = end[p].max(end[i]);
        }
        end
    }

    pub fn index(&self) -> ShapeIndex {
        let mut pos = vec![ROOT; 64];
        let mut cnode = vec![ROOT; 64];
        for (i, n) in self.nodes.iter().enumerate() {
            let mut m = n.marks;
            while m != 0 {
                pos[m.trailing_zeros() as usize] = i as u8;
                m &= m - 1;
            }
            let mut c = n.consts;
            while c != 0 {
                cnode[c.trailing_zeros() as usize] = i as u8;
                c &= c - 1;
            }
        }
        ShapeIndex { pos, end: self.ends(), cnode }
    }

    /// Inserts `node` at preorder index `idx`, shifting later references.
    fn insert_at(&self, idx: usize, node: PNode) -> Shape {
        let mut nodes = Vec::with_capacity(self.nodes.len() + 1);
        for (i, n) in self.nodes.iter().enumerate() {
            if i == idx {
                nodes.push(node);
            }
            let mut n = *n;
            if n.parent != ROOT && n.parent as usize >= idx {
                n.parent += 1;
            }
            nodes.push(n);
        }
        if idx == self.nodes.len() {
            nodes.push(node);
        }
        Shape { nodes }
    }

    /// Every way of adding a new position with mark bit `mark`.
    pub fn placements(&self, mark: usize, out: &mut Vec<Shape>) {
        let bit = 1u64 << mark;
        let n = self.nodes.len();
        if n >= MAX_SHAPE_NODES {
            return;
        }
        let end = self.ends();
        let leaf = |parent: usize| PNode { parent: parent as u8, consts: 0, marks: bit };
        for v in 0..n {
            let mut t = self.clone();
            t.nodes[v].marks |= bit;
            out.push(t);
            let children: Vec<usize> =
                (v + 1..end[v] as usize).filter(|&c| self.nodes[c].parent as usize == v).collect();
            for slot in 0..=children.len() {
                let idx = if slot < children.len() { children[slot] } else { end[v] as usize };
                out.push(self.insert_at(idx, leaf(v)));
            }
            // Edges into constants join constants of adjacent lengths.
            if v == 0 || self.nodes[v].consts != 0 {
                continue;
            }
            let p = self.nodes[v].parent;
            let mut t = self.insert_at(v, PNode { parent: p, consts: 0, marks: bit });
            t.nodes[v + 1].parent = v as u8;
            out.push(t);
            let branch = PNode { parent: p, consts: 0, marks: 0 };
            let mut t = self.insert_at(v, branch).insert_at(v + 1, leaf(v));
            t.nodes[v + 2].parent = v as u8;
            out.push(t);
            let mut t = self.insert_at(v, branch);
            t.nodes[v + 1].parent = v as u8;
            let t = t.insert_at(end[v] as usize + 1, leaf(v));
            out.push(t);
        }
    }

    /// Projection onto the listed positions, renumbered in list order.
    pub fn project(&self, positions: &[usize]) -> Shape {
        self.project_with_origin(positions).0
    }

    pub fn project_with_origin(&self, positions: &[usize]) -> (Shape, Vec<usize>) {
        let n = self.nodes.len();
        let sel_mask = positions.iter().fold(0u64, |m, &p| m | 1 << p);
        let own: Vec<bool> =
            self.nodes.iter().map(|nd| nd.consts != 0 || nd.marks & sel_mask != 0).collect();
        let mut content = own.clone();
        let mut busy = vec![0u8; n];
        for i in (1..n).rev() {
            let p = self.nodes[i].parent as usize;
            if content[i] {
                content[p] = true;
                busy[p] = busy[p].saturating_add(1);
            }
        }
        let mut new_index = vec![ROOT; n];
        let mut nodes = Vec::with_capacity(n);
        let mut origin = Vec::with_capacity(n);
        for i in 0..n {
            if !(i == 0 || own[i] || busy[i] >= 2) {
                continue;
            }
            let mut p = self.nodes[i].parent;
            while p != ROOT && new_index[p as usize] == ROOT {
                p = self.nodes[p as usize].parent;
            }
            let parent = if p == ROOT { ROOT } else { new_index[p as usize] };
            let old = self.nodes[i].marks & sel_mask;
            let mut marks = 0u64;
            if old != 0 {
                for (j, &q) in positions.iter().enumerate() {
                    if old >> q & 1 == 1 {
                        marks |= 1 << j;
                    }
                }
            }
            new_index[i] = nodes.len() as u8;
            origin.push(i);
            nodes.push(PNode { parent, consts: self.nodes[i].consts, marks });
        }
        (Shape { nodes }, origin)
    }

    /// The identity pairing of a single-group shape with `n` positions.
    pub fn doubled(&self, n: usize) -> Shape {
        let nodes = self.nodes.iter().map(|nd| PNode { marks: nd.marks | nd.marks << n, ..*nd }).collect();
        Shape { nodes }
    }
}

fn bits(mut m: u64) -> Vec<u16> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as u16);
        m &= m - 1;
    }
    out
}

/// Counts candidate placements against the configured ceiling.
pub struct Budget {
    used: u64,
    ceiling: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { used: 0, ceiling: type_ceiling() }
    }
}

impl Budget {
    pub fn spend(&mut self, n: usize) -> Result<(), OrderTypeError> {
        self.used += n as u64;
        if self.used > self.ceiling {
            Err(OrderTypeError::ResourceLimit(self.ceiling))
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

/// Inserts positions `first..first + count` one at a time. After inserting
/// position `first + j`, `keep(shape, j)` may discard partial shapes.
pub fn extend_positions(
    start: &Shape,
    first: usize,
    count: usize,
    budget: &mut Budget,
    mut keep: impl FnMut(&Shape, usize) -> bool,
) -> Result<Vec<Shape>, OrderTypeError> {
    if first + count > 64 {
        return Err(too_large("more than 64 positions"));
    }
    let mut layer = vec![start.clone()];
    let mut scratch = Vec::new();
    for j in 0..count {
        let mut next: HashSet<Shape> = HashSet::new();
        for s in &layer {
            scratch.clear();
            s.placements(first + j, &mut scratch);
            budget.spend(scratch.len())?;
            for c in scratch.drain(..) {
                if keep(&c, j) {
                    next.insert(c);
                }
            }
        }
        layer = next.into_iter().collect();
        layer.sort();
    }
    Ok(layer)
}

/// The constant skeleton: the MCAT of the constants alone.
pub fn skeleton(constants: &ConstantSet) -> Result<Shape, OrderTypeError> {
    Shape::from_type(&mcat(&[], 1, constants).ty)
}

/// All types of `groups` tuples of `dim` positions over `constants`, sorted.
pub fn enumerate_types(
    dim: usize,
    groups: usize,
    constants: &ConstantSet,
) -> Result<Vec<OrderType>, OrderTypeError> {
    let mut budget = Budget::default();
    let arity = dim * groups;
    let shapes = extend_positions(&skeleton(constants)?, 0, arity, &mut budget, |_, _| true)?;
    let mut out: Vec<OrderType> = shapes.iter().map(|s| s.to_type(dim, arity)).collect();
    out.sort();
    Ok(out)
}

/// The identity pairing of a configuration type.
pub fn identity_pair(single: &OrderType) -> OrderType {
    single.doubled()
}

/// One element of a product `π₁ · π₂`: the outer pair type on `(x̄, z̄)` and a
/// witnessing type of the triple `(x̄, ȳ, z̄)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub outer: OrderType,
    pub triple: OrderType,
}

/// All `(x̄, z̄)` types of triples realizing `p1` on `(x̄, ȳ)` and `p2` on
/// `(ȳ, z̄)`. Empty when the junction restrictions differ.
pub fn compose_pairs(p1: &OrderType, p2: &OrderType) -> Result<Vec<Composite>, OrderTypeError> {
    let n = p1.dim();
    if p2.dim() != n || p1.arity() != 2 * n || p2.arity() != 2 * n {
        return Err(OrderTypeError::TypeMismatch("pair types of different arity".into()));
    }
    if p1.second() != p2.first() {
        return Ok(Vec::new());
    }
    let s1 = Shape::from_type(p1)?;
    let s2 = Shape::from_type(p2)?;
    let targets: Vec<Shape> =
        (1..=n).map(|j| s2.project(&(0..n + j).collect::<Vec<_>>())).collect();
    let selections: Vec<Vec<usize>> = (1..=n).map(|j| (n..2 * n + j).collect()).collect();
    let mut budget = Budget::default();
    let triples = extend_positions(&s1, 2 * n, n, &mut budget, |s, j| {
        s.project(&selections[j]) == targets[j]
    })?;
    let xz: Vec<usize> = (0..n).chain(2 * n..3 * n).collect();
    let mut out: BTreeMap<Shape, Shape> = BTreeMap::new();
    for t in triples {
        out.entry(t.project(&xz)).or_insert(t);
    }
    Ok(out
        .into_iter()
        .map(|(o, t)| Composite { outer: o.to_type(n, 2 * n), triple: t.to_type(n, 3 * n) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_types::typ_pair;
    use crate::tree::Word;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn ten_pair_types_in_one_dimension() {
        let all = enumerate_types(1, 2, &ConstantSet::default()).unwrap();
        assert_eq!(all.len(), 10);
        let single = enumerate_types(1, 1, &ConstantSet::default()).unwrap();
        assert_eq!(single.len(), 2);
    }

    #[test]
    fn enumeration_contains_concrete_types() {
        let all = enumerate_types(1, 2, &ConstantSet::default()).unwrap();
        for (a, b) in [("1", "2"), ("2", "1"), ("1", "1.1"), ("1.1", "1"), ("1.1", "1.2"), ("eps", "eps")] {
            let t = typ_pair(&[w(a)], &[w(b)], &ConstantSet::default());
            assert!(all.contains(&t), "{a} {b}");
        }
    }

    #[test]
    fn packed_round_trip() {
        let c = ConstantSet::closed(vec![("c".into(), w("1.2"))]).unwrap();
        for t in enumerate_types(2, 2, &c).unwrap().iter().step_by(97) {
            let s = Shape::from_type(t).unwrap();
            assert_eq!(&s.to_type(2, 4), t);
            assert_eq!(s.project(&[2, 3]).to_type(2, 2), t.second());
        }
    }

    #[test]
    fn compose_ascending_chains() {
        let none = ConstantSet::default();
        let up = typ_pair(&[w("1")], &[w("1.1")], &none);
        let out = compose_pairs(&up, &up).unwrap();
        let expect = typ_pair(&[w("1")], &[w("1.1.1")], &none);
        assert!(out.iter().any(|c| c.outer == expect));
        // Two prefixes of a common word are comparable.
        let down = typ_pair(&[w("1.1")], &[w("1")], &none);
        let out = compose_pairs(&up, &down).unwrap();
        let outers: Vec<_> = out.iter().map(|c| c.outer.clone()).collect();
        assert_eq!(outers.len(), 3);
        assert!(outers.contains(&typ_pair(&[w("1")], &[w("1")], &none)));
        assert!(outers.contains(&typ_pair(&[w("1")], &[w("1.1")], &none)));
        assert!(outers.contains(&typ_pair(&[w("1.1")], &[w("1")], &none)));
    }

    #[test]
    fn identity_is_a_unit() {
        let none = ConstantSet::default();
        let t = typ_pair(&[w("1"), w("2")], &[w("1.3"), w("1")], &none);
        let id = identity_pair(&t.first());
        let out = compose_pairs(&id, &t).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].outer, t);
        let mismatch = typ_pair(&[w("1"), w("1")], &[w("1"), w("1")], &none);
        assert!(compose_pairs(&mismatch, &t).unwrap().is_empty());
    }
}
