//! Repairing a noncontracting loop into a stretching one by inserting gaps.

use std::cmp::Ordering;

use super::EngineError;
use crate::order_types::{insert_gap_all, is_noncontracting, mcat, typ_pair, Configuration, Mcat};
use crate::tree::{ConstantSet, Word};

/// The lexicographic progress measure of one repair iteration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    /// Number of comparable problematic nodes per depth, shallowest first.
    pub comparable: Vec<usize>,
    /// Distance of the leftmost left-moving problematic node from the right end.
    pub left: usize,
    /// Same for right-moving nodes in mirrored order.
    pub right: usize,
}

#[derive(Clone, Debug, Default)]
pub struct StretchReport {
    pub measures: Vec<Measure>,
}

impl StretchReport {
    pub fn iterations(&self) -> usize {
        self.measures.len()
    }

    /// Whether the measure strictly decreased at every iteration.
    pub fn progressed(&self) -> bool {
        self.measures.windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Left,
    Right,
    Down,
}

/// Lex order with children in reverse label order.
fn mirror_cmp(a: &Word, b: &Word) -> Ordering {
    for (x, y) in a.labels().iter().zip(b.labels()) {
        if x != y {
            return y.cmp(x);
        }
    }
    a.len().cmp(&b.len())
}

struct Problem {
    kind: Kind,
    u1: usize,
    u2: usize,
    deficit: usize,
}

fn problems(ma: &Mcat, mb: &Mcat) -> Vec<Problem> {
    let mut out = Vec::new();
    for u2 in 1..ma.words.len() {
        let (w, hw) = (&ma.words[u2], &mb.words[u2]);
        let kind = if w.comparable(hw) {
            Kind::Down
        } else if w < hw {
            Kind::Left
        } else {
            Kind::Right
        };
        let mut u1 = ma.ty.parent(u2);
        while let Some(d) = u1 {
            let da = w.len() - ma.words[d].len();
            let db = hw.len() - mb.words[d].len();
            if da > db {
                out.push(Problem { kind, u1: d, u2, deficit: da - db });
            }
            u1 = ma.ty.parent(d);
        }
    }
    out
}

fn measure(ma: &Mcat, probs: &[Problem]) -> Measure {
    let n = ma.words.len();
    let depth_count = (0..n).map(|v| ma.ty.depth(v)).max().unwrap_or(0) + 1;
    let mut comparable = vec![0; depth_count];
    let mut seen = vec![false; n];
    for p in probs.iter().filter(|p| p.kind == Kind::Down) {
        if !std::mem::replace(&mut seen[p.u2], true) {
            comparable[ma.ty.depth(p.u2)] += 1;
        }
    }
    // Nodes are in lex order, so the node index is the lex rank.
    let left = probs.iter().filter(|p| p.kind == Kind::Left).map(|p| n - p.u2).max().unwrap_or(0);
    let mut mirror: Vec<usize> = (0..n).collect();
    mirror.sort_by(|&a, &b| mirror_cmp(&ma.words[a], &ma.words[b]));
    let mut mirror_rank = vec![0; n];
    for (r, &v) in mirror.iter().enumerate() {
        mirror_rank[v] = r;
    }
    let right = probs
        .iter()
        .filter(|p| p.kind == Kind::Right)
        .map(|p| n - mirror_rank[p.u2])
        .max()
        .unwrap_or(0);
    Measure { comparable, left, right }
}

/// Picks the repair: the leftmost left-moving node, else the mirror-leftmost
/// right-moving node, else the leftmost comparable node; then the ancestor
/// with the largest deficit, deepest among ties.
fn choose<'a>(ma: &Mcat, probs: &'a [Problem]) -> &'a Problem {
    let pick_u2 = |kind: Kind| -> Option<usize> {
        let nodes = probs.iter().filter(|p| p.kind == kind).map(|p| p.u2);
        if kind == Kind::Right {
            nodes.min_by(|&a, &b| mirror_cmp(&ma.words[a], &ma.words[b]))
        } else {
            nodes.min()
        }
    };
    let u2 = pick_u2(Kind::Left)
        .or_else(|| pick_u2(Kind::Right))
        .or_else(|| pick_u2(Kind::Down))
        .expect("nonempty problem list");
    probs
        .iter()
        .filter(|p| p.u2 == u2)
        .max_by(|a, b| a.deficit.cmp(&b.deficit).then_with(|| ma.words[a.u1].len().cmp(&ma.words[b.u1].len())))
        .expect("problem for chosen node")
}

const MAX_ITERATIONS: usize = 10_000;

/// Turns a noncontracting loop into a stretching one: the result is a run of
/// the same states whose first configuration is stretch-below its last, and
/// every configuration is stretch-above its original.
pub fn stretchify(
    run: &[Configuration],
    constants: &ConstantSet,
) -> Result<(Vec<Configuration>, StretchReport), EngineError> {
    let (Some(first), Some(last)) = (run.first(), run.last()) else {
        return Err(EngineError::PreconditionViolated("empty loop".into()));
    };
    let n = first.values.len();
    let pair = typ_pair(&first.values, &last.values, constants);
    if n > 0 && !is_noncontracting(&pair)? {
        return Err(EngineError::PreconditionViolated("loop is not noncontracting".into()));
    }
    let mut run = run.to_vec();
    let mut report = StretchReport::default();
    let dim = n.max(1);
    loop {
        let ma = mcat(&run[0].values, dim, constants);
        let mb = mcat(&run[run.len() - 1].values, dim, constants);
        let probs = problems(&ma, &mb);
        if probs.is_empty() {
            return Ok((run, report));
        }
        if report.measures.len() >= MAX_ITERATIONS {
            return Err(EngineError::Internal("stretch repair did not terminate".into()));
        }
        report.measures.push(measure(&ma, &probs));
        let p = choose(&ma, &probs);
        let at = &mb.words[p.u2];
        if constants.is_fixed(at) {
            return Err(EngineError::Internal(format!("repair point {at} is fixed")));
        }
        let at = at.clone();
        insert_gap_all(&mut run, &at, p.deficit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_types::stretch_leq;

    fn cfg(vals: &[&str]) -> Configuration {
        Configuration::new(0, vals.iter().map(|s| s.parse().unwrap()).collect())
    }

    #[test]
    fn repairs_shrinking_interval() {
        let none = ConstantSet::default();
        // First 1.1.1.1 below root, then 2.1: the interval shrinks.
        let run = vec![cfg(&["1.1.1.1"]), cfg(&["2.1"])];
        let (out, report) = stretchify(&run, &none).unwrap();
        assert!(stretch_leq(&out[0], &out[1], &none));
        assert!(report.progressed());
        for (a, b) in run.iter().zip(&out) {
            assert!(stretch_leq(a, b, &none));
        }
    }

    #[test]
    fn contracting_loop_is_rejected() {
        let none = ConstantSet::default();
        let run = vec![cfg(&["1.1"]), cfg(&["1"])];
        assert!(matches!(stretchify(&run, &none), Err(EngineError::PreconditionViolated(_))));
    }

    #[test]
    fn single_downward_step() {
        let none = ConstantSet::default();
        let run = vec![cfg(&["1", "1.1.1.1"]), cfg(&["1.1.1", "1.1.1.1.1"])];
        assert!(!stretch_leq(&run[0], &run[1], &none));
        let (out, report) = stretchify(&run, &none).unwrap();
        assert_eq!(report.iterations(), 1);
        assert_eq!(out, vec![run[0].clone(), cfg(&["1.1.1", "1.1.1.1.1.0"])]);
        assert!(stretch_leq(&out[0], &out[1], &none));
    }

    #[test]
    fn stretching_loop_is_unchanged() {
        let none = ConstantSet::default();
        let run = vec![cfg(&["1", "1.1"]), cfg(&["1.1", "1.1.1"])];
        let (out, report) = stretchify(&run, &none).unwrap();
        assert_eq!(out, run);
        assert_eq!(report.iterations(), 0);
    }
}
