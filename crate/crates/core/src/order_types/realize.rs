//! Concrete realizations of types: fresh labels from the density of ℚ,
//! optionally anchored at prescribed words for a meet-closed set of nodes.

use super::{mcat, Configuration, OrderType, OrderTypeError};
use crate::tree::{insert_gap, ConstantSet, Rational, Word};

/// `count` labels strictly between `lo` and `hi` (either may be unbounded),
/// evenly spaced and increasing.
fn spread(lo: Option<&Rational>, hi: Option<&Rational>, count: usize) -> Vec<Rational> {
    let m = count as i64;
    (1..=m)
        .map(|j| match (lo, hi) {
            (Some(a), Some(b)) => {
                let step = b.sub(a);
                let num = Rational::new(j, m + 1);
                a.add(&step.mul(&num))
            }
            (Some(a), None) => a.plus_int(j),
            (None, Some(b)) => b.plus_int(j - m - 1),
            (None, None) => Rational::integer(j),
        })
        .collect()
}

/// Assigns a word to every node of `ty` such that the MCAT of the resulting
/// position words has exactly type `ty`.
///
/// `anchors` prescribes words for some nodes; the anchored set together with
/// the root and the constants must be closed under meets, and between an
/// anchor and the topmost anchored node below it there must be room for the
/// unanchored nodes on that path. Fresh nodes get a new label followed by
/// `gap` filler labels, so every new edge is longer than `gap`.
pub fn realize(
    ty: &OrderType,
    anchors: &[Option<Word>],
    constants: &ConstantSet,
    gap: usize,
) -> Result<Vec<Word>, OrderTypeError> {
    let n = ty.len();
    if anchors.len() != n {
        return Err(OrderTypeError::Internal("anchor vector has the wrong length".into()));
    }
    let mut words: Vec<Option<Word>> = anchors.to_vec();
    match &words[0] {
        Some(r) if !r.is_empty() => {
            return Err(OrderTypeError::PreconditionViolated("root anchored off ε".into()))
        }
        _ => words[0] = Some(Word::empty()),
    }
    for (v, node) in ty.nodes().iter().enumerate() {
        if let Some(&c) = node.consts.first() {
            let value = constants.value(c as usize).clone();
            match &words[v] {
                Some(existing) if *existing != value => {
                    return Err(OrderTypeError::PreconditionViolated(format!(
                        "constant node anchored at {existing} instead of {value}"
                    )))
                }
                _ => words[v] = Some(value),
            }
        }
    }
    let anchored: Vec<bool> = words.iter().map(Option::is_some).collect();
    let children: Vec<Vec<usize>> = (0..n).map(|v| ty.children(v)).collect();

    // Topmost anchored node strictly below each unanchored node.
    let mut top: Vec<Option<usize>> = vec![None; n];
    for v in (0..n).rev() {
        if anchored[v] {
            continue;
        }
        let mut found = None;
        for &c in &children[v] {
            let rep = if anchored[c] { Some(c) } else { top[c] };
            if let Some(r) = rep {
                if found.is_some() {
                    return Err(OrderTypeError::PreconditionViolated(
                        "anchored nodes are not closed under meets".into(),
                    ));
                }
                found = Some(r);
            }
        }
        top[v] = found;
    }

    for v in 0..n {
        let base = words[v].clone().expect("parents are assigned before children");
        let depth = base.len();
        let kids = &children[v];
        let mut determined: Vec<Option<Rational>> = Vec::with_capacity(kids.len());
        for &c in kids {
            let rep = if anchored[c] { Some(c) } else { top[c] };
            match rep {
                Some(a) => {
                    let wa = words[a].as_ref().expect("anchored");
                    if wa.len() <= depth || !base.is_prefix_of(wa) {
                        return Err(OrderTypeError::PreconditionViolated(format!(
                            "anchor {wa} does not extend {base}"
                        )));
                    }
                    determined.push(Some(wa.labels()[depth].clone()));
                }
                None => determined.push(None),
            }
        }
        for pair in determined.iter().flatten().collect::<Vec<_>>().windows(2) {
            if pair[0] >= pair[1] {
                return Err(OrderTypeError::PreconditionViolated(
                    "anchored children out of order".into(),
                ));
            }
        }
        // Fill runs of free children between determined neighbours.
        let mut i = 0;
        while i < kids.len() {
            if determined[i].is_some() {
                i += 1;
                continue;
            }
            let start = i;
            while i < kids.len() && determined[i].is_none() {
                i += 1;
            }
            let lo = if start > 0 { determined[start - 1].as_ref() } else { None };
            let hi = if i < kids.len() { determined[i].as_ref() } else { None };
            for (k, label) in spread(lo, hi, i - start).into_iter().enumerate() {
                let mut w = base.child(label);
                for _ in 0..gap {
                    w = w.child(Rational::one());
                }
                words[kids[start + k]] = Some(w);
            }
        }
        // Chain children: unanchored nodes on the path to an anchor.
        for &c in kids {
            if anchored[c] || words[c].is_some() {
                continue;
            }
            let a = top[c].expect("free children were filled above");
            let mut path = Vec::new();
            let mut u = ty.parent(a).expect("anchor below c");
            while !anchored[u] {
                path.push(u);
                u = ty.parent(u).expect("root is anchored");
            }
            path.reverse();
            let u0 = words[u].as_ref().expect("anchored").len();
            let wa = words[a].clone().expect("anchored");
            let k = path.len();
            let room = wa.len() - u0;
            if room < k + 1 {
                return Err(OrderTypeError::PreconditionViolated(format!(
                    "no room for {k} nodes between lengths {u0} and {}",
                    wa.len()
                )));
            }
            for (j, &node) in path.iter().enumerate() {
                let len = u0 + (j + 1) * room / (k + 1);
                words[node] = Some(wa.prefix(len));
            }
        }
    }

    let words: Vec<Word> = words.into_iter().map(|w| w.expect("all assigned")).collect();
    let values: Vec<Word> = (0..ty.arity()).map(|p| words[ty.node_of(p)].clone()).collect();
    let check = mcat(&values, ty.dim().max(1), constants);
    if check.ty.nodes() != ty.nodes() {
        return Err(OrderTypeError::Internal(format!(
            "realization has type {} instead of {}",
            check.ty, ty
        )));
    }
    Ok(words)
}

/// Position words of a realization of `ty` over `constants` whose MCAT has
/// gaps larger than `gap` above every node that is not a constant.
pub fn realize_with_gaps(
    ty: &OrderType,
    constants: &ConstantSet,
    gap: usize,
) -> Result<Vec<Word>, OrderTypeError> {
    let words = realize(ty, &vec![None; ty.len()], constants, gap)?;
    let values: Vec<Word> = (0..ty.arity()).map(|p| words[ty.node_of(p)].clone()).collect();
    if !has_gaps(&values, constants, gap) {
        return Err(OrderTypeError::Internal("realization lacks the requested gaps".into()));
    }
    Ok(values)
}

/// Whether every edge `d ≺ e` of the MCAT with `e` not a prefix of a constant
/// is longer than `gap`.
pub fn has_gaps(values: &[Word], constants: &ConstantSet, gap: usize) -> bool {
    let m = mcat(values, values.len().max(1), constants);
    (1..m.words.len()).all(|e| {
        let d = m.ty.parent(e).expect("non-root");
        constants.is_fixed(&m.words[e]) || m.words[e].len() - m.words[d].len() > gap
    })
}

/// Realizes the positions of `ty` not listed in `positions`, keeping the
/// listed ones at `known`. Returns all position words.
pub fn realize_extending(
    ty: &OrderType,
    positions: &[usize],
    known: &[Word],
    constants: &ConstantSet,
    gap: usize,
) -> Result<Vec<Word>, OrderTypeError> {
    let (sub, origin) = ty.project(positions, ty.dim());
    let m = mcat(known, ty.dim(), constants);
    if m.ty.nodes() != sub.nodes() {
        return Err(OrderTypeError::TypeMismatch(format!(
            "known values have type {} but {} is required",
            m.ty, sub
        )));
    }
    let mut anchors = vec![None; ty.len()];
    for (i, &o) in origin.iter().enumerate() {
        anchors[o] = Some(m.words[i].clone());
    }
    let words = realize(ty, &anchors, constants, gap)?;
    Ok((0..ty.arity()).map(|p| words[ty.node_of(p)].clone()).collect())
}

/// Given `v̄` and a pair type `t2` whose first restriction is `typ_C(v̄)`,
/// returns `ū` with `typ_C(v̄, ū) = t2`.
pub fn extend_realization(
    v: &[Word],
    t2: &OrderType,
    constants: &ConstantSet,
) -> Result<Vec<Word>, OrderTypeError> {
    let n = v.len();
    let positions: Vec<usize> = (0..n).collect();
    let gap = 2 * n + 1;
    let all = realize_extending(t2, &positions, v, constants, gap)?;
    Ok(all[n..].to_vec())
}

/// Inserts an `m`-gap at `u` in every configuration of `run`.
pub fn insert_gap_all(run: &mut [Configuration], u: &Word, m: usize) {
    for c in run.iter_mut() {
        for w in c.values.iter_mut() {
            *w = insert_gap(u, m, w);
        }
    }
}

/// Inserts an `m`-gap at every listed node that is not fixed, deepest first,
/// in every configuration of `run`.
pub fn regap(run: &mut [Configuration], nodes: &[Word], m: usize, constants: &ConstantSet) {
    if m == 0 {
        return;
    }
    let mut order: Vec<&Word> = nodes.iter().filter(|u| !constants.is_fixed(u)).collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    order.dedup();
    for u in order {
        insert_gap_all(run, u, m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_types::{enumerate_types, typ_pair};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn every_pair_type_realizes_with_gaps() {
        let c = ConstantSet::closed(vec![("c".into(), w("1.2"))]).unwrap();
        for cs in [ConstantSet::default(), c] {
            for t in enumerate_types(2, 2, &cs).unwrap() {
                let vals = realize_with_gaps(&t, &cs, 4).unwrap();
                assert_eq!(typ_pair(&vals[..2], &vals[2..], &cs), t);
                assert!(has_gaps(&vals, &cs, 4));
            }
        }
    }

    #[test]
    fn root_type_realizes_at_root() {
        let none = ConstantSet::default();
        let t = typ_pair(&[w("eps")], &[w("eps")], &none);
        assert_eq!(realize_with_gaps(&t, &none, 3).unwrap(), vec![w("eps"), w("eps")]);
        let c = ConstantSet::closed(vec![("c".into(), w("1"))]).unwrap();
        let t = typ_pair(&[w("1")], &[w("1.5")], &c);
        assert_eq!(realize_with_gaps(&t, &c, 2).unwrap()[0], w("1"));
    }

    #[test]
    fn extension_matches_type() {
        let none = ConstantSet::default();
        let v = vec![w("1.0.0.1")];
        let t2 = typ_pair(&[w("1")], &[w("1.1")], &none);
        let u = extend_realization(&v, &t2, &none).unwrap();
        assert_eq!(typ_pair(&v, &u, &none), t2);
        assert!(v[0].is_prefix_of(&u[0]));
        let id = typ_pair(&[w("1")], &[w("1")], &none);
        assert_eq!(extend_realization(&v, &id, &none).unwrap(), v);
        let mismatch = typ_pair(&[w("eps")], &[w("1")], &none);
        assert!(matches!(extend_realization(&v, &mismatch, &none), Err(OrderTypeError::TypeMismatch(_))));
    }

    #[test]
    fn spread_is_strictly_between() {
        let a = Rational::integer(1);
        let b = Rational::integer(2);
        let mid = spread(Some(&a), Some(&b), 3);
        assert!(mid.windows(2).all(|p| p[0] < p[1]));
        assert!(mid[0] > a && mid[2] < b);
        assert_eq!(spread(None, Some(&a), 1), vec![Rational::integer(0)]);
        assert_eq!(spread(Some(&a), None, 1), vec![Rational::integer(2)]);
    }
}
