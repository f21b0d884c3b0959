//! The stretch quasi-order on configurations and common upper bounds.

use super::{mcat, regap, Configuration, Mcat, OrderTypeError};
use crate::tree::ConstantSet;

/// Whether every interval `d ≺ e` of `a` is no longer than its image in `b`.
/// Both MCATs must have the same type.
pub(crate) fn intervals_grow(a: &Mcat, b: &Mcat) -> bool {
    let n = a.words.len();
    for e in 1..n {
        let mut d = a.ty.parent(e);
        while let Some(dd) = d {
            let da = a.words[e].len() - a.words[dd].len();
            let db = b.words[e].len() as isize - b.words[dd].len() as isize;
            if db < da as isize {
                return false;
            }
            d = a.ty.parent(dd);
        }
    }
    true
}

/// `a ⪯-stretch b`: same state, same type, and no interval shrinks under the
/// induced isomorphism.
pub fn stretch_leq(a: &Configuration, b: &Configuration, constants: &ConstantSet) -> bool {
    if a.state != b.state || a.values.len() != b.values.len() {
        return false;
    }
    let dim = a.values.len().max(1);
    let ma = mcat(&a.values, dim, constants);
    let mb = mcat(&b.values, dim, constants);
    ma.ty == mb.ty && intervals_grow(&ma, &mb)
}

/// A configuration above both `a` and `b` in the stretch order, obtained by
/// inserting gaps into `b` at every node of its MCAT that is not fixed.
pub fn stretch_upper_bound(
    a: &Configuration,
    b: &Configuration,
    constants: &ConstantSet,
) -> Result<Configuration, OrderTypeError> {
    if a.state != b.state {
        return Err(OrderTypeError::TypeMismatch("states differ".into()));
    }
    let dim = a.values.len().max(1);
    let ma = mcat(&a.values, dim, constants);
    let mb = mcat(&b.values, dim, constants);
    if ma.ty != mb.ty || a.values.len() != b.values.len() {
        return Err(OrderTypeError::TypeMismatch("configuration types differ".into()));
    }
    if a == b {
        return Ok(a.clone());
    }
    let d = ma.words.iter().map(|w| w.len()).max().unwrap_or(0);
    let mut c = [b.clone()];
    regap(&mut c, &mb.words, d, constants);
    let [c] = c;
    if !stretch_leq(a, &c, constants) || !stretch_leq(b, &c, constants) {
        return Err(OrderTypeError::Internal("upper bound post-check failed".into()));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Word;

    fn cfg(state: usize, vals: &[&str]) -> Configuration {
        Configuration::new(state, vals.iter().map(|s| s.parse::<Word>().unwrap()).collect())
    }

    #[test]
    fn stretch_examples() {
        let none = ConstantSet::default();
        assert!(stretch_leq(&cfg(0, &["1"]), &cfg(0, &["1.2"]), &none));
        assert!(!stretch_leq(&cfg(0, &["1.2"]), &cfg(0, &["1"]), &none));
        assert!(!stretch_leq(&cfg(0, &["1"]), &cfg(1, &["1"]), &none));
    }

    #[test]
    fn upper_bounds() {
        let none = ConstantSet::default();
        let a = cfg(0, &["1.1"]);
        let b = cfg(0, &["1"]);
        let c = stretch_upper_bound(&a, &b, &none).unwrap();
        assert!(c.values[0].len() >= 2);
        assert_eq!(stretch_upper_bound(&a, &a, &none).unwrap(), a);
        let e = stretch_upper_bound(&cfg(0, &["eps"]), &b, &none);
        assert!(matches!(e, Err(OrderTypeError::TypeMismatch(_))));
        let a = cfg(0, &["1.1.1", "1.1.2", "3"]);
        let b = cfg(0, &["2.5", "2.6", "2.6.1"]);
        assert!(stretch_upper_bound(&a, &b, &none).is_err());
        let b = cfg(0, &["2.5", "2.6", "7"]);
        let c = stretch_upper_bound(&a, &b, &none).unwrap();
        assert!(stretch_leq(&a, &c, &none) && stretch_leq(&b, &c, &none));
    }
}
