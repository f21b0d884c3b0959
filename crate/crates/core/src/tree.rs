//! Exact primitives for the rational order tree: words over rational labels,
//! the prefix order, the lexicographic order, greatest common prefixes, gap
//! insertion and the order embedding into the binary tree.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("malformed rational label `{0}`")]
    BadLabel(String),
    #[error("malformed word `{0}`")]
    BadWord(String),
    #[error("label {0} is not positive; normalize the instance first")]
    NonPositiveLabel(Rational),
    #[error("duplicate constant name `{0}`")]
    DuplicateName(String),
    #[error("constants `{0}` and `{1}` denote the same word")]
    DuplicateValue(String, String),
    #[error("constant set is not closed under prefixes: `{0}` is missing")]
    NotPrefixClosed(Word),
    #[error("`{0}` is not a valid constant name")]
    BadName(String),
}

/// An exact rational branch label, always kept in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Rational {
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(n: i64) -> Rational {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn one() -> Rational {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The integer value, if this label is an integer fitting in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn midpoint(&self, other: &Rational) -> Rational {
        Rational((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        Rational(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational(&self.0 * &other.0)
    }

    pub fn plus_int(&self, n: i64) -> Rational {
        Rational(&self.0 + BigRational::from_integer(BigInt::from(n)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TreeError::BadLabel(s.to_string());
        let parse_int = |t: &str| -> Result<BigInt, TreeError> {
            if t.is_empty() || t.contains(char::is_whitespace) || t.starts_with('+') {
                return Err(bad());
            }
            t.parse::<BigInt>().map_err(|_| bad())
        };
        match s.split_once('/') {
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
            Some((p, q)) => {
                let q = parse_int(q)?;
                if !q.is_positive() {
                    return Err(bad());
                }
                Ok(Rational(BigRational::new(parse_int(p)?, q)))
            }
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

/// A node of the tree: a finite sequence of rational labels. The empty word
/// is the root.
///
/// The derived `Ord` is the lexicographic order of the tree (a proper prefix
/// sorts before its extensions), so `w <= v` is exactly `lex_leq(w, v)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Rational>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_labels(labels: Vec<Rational>) -> Word {
        Word(labels)
    }

    /// Convenience constructor from integer labels.
    pub fn ints(labels: &[i64]) -> Word {
        Word(labels.iter().map(|&l| Rational::integer(l)).collect())
    }

    pub fn labels(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn child(&self, label: Rational) -> Word {
        let mut labels = self.0.clone();
        labels.push(label);
        Word(labels)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut labels = self.0.clone();
        labels.extend(other.0.iter().cloned());
        Word(labels)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        prefix_leq(self, other)
    }

    pub fn comparable(&self, other: &Word) -> bool {
        prefix_leq(self, other) || prefix_leq(other, self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Word {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "eps" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(TreeError::BadWord(s.to_string()));
        }
        s.split('.')
            .map(|l| l.parse::<Rational>())
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
            .map_err(|_| TreeError::BadWord(s.to_string()))
    }
}

/// `w ⪯ v`: `w` is a (non-strict) prefix of `v`.
pub fn prefix_leq(w: &Word, v: &Word) -> bool {
    w.0.len() <= v.0.len() && w.0.iter().zip(&v.0).all(|(a, b)| a == b)
}

/// `w ⊑ v` in the lexicographic order of the tree.
pub fn lex_leq(w: &Word, v: &Word) -> bool {
    w <= v
}

/// Greatest common prefix.
pub fn gcp(w: &Word, v: &Word) -> Word {
    let k = w.0.iter().zip(&v.0).take_while(|(a, b)| a == b).count();
    w.prefix(k)
}

/// Insertion of an `m`-gap at `u`: words below `u` get `m` zero labels
/// spliced in right after `u`; all other words are unchanged.
pub fn insert_gap(u: &Word, m: usize, w: &Word) -> Word {
    if !prefix_leq(u, w) {
        return w.clone();
    }
    let mut labels = Vec::with_capacity(w.len() + m);
    labels.extend_from_slice(&w.0[..u.len()]);
    labels.extend(std::iter::repeat_n(Rational::zero(), m));
    labels.extend_from_slice(&w.0[u.len()..]);
    Word(labels)
}

/// Maps a positive rational into `{11,22}*12` by its Stern–Brocot path:
/// a left step is written `1.1`, a right step `2.2`, and the path ends in
/// `1.2`. The map is injective and strictly monotone from `<` into `⊑`.
pub fn rational_to_o(q: &Rational) -> Result<Word, TreeError> {
    if !q.is_positive() {
        return Err(TreeError::NonPositiveLabel(q.clone()));
    }
    let one = Rational::integer(1);
    let two = Rational::integer(2);
    let target = &q.0;
    // Bounds as (numerator, denominator) pairs, starting from 0/1 and 1/0.
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut rn, mut rd) = (BigInt::one(), BigInt::zero());
    let mut labels = Vec::new();
    loop {
        let mn = &ln + &rn;
        let md = &ld + &rd;
        let mediant = BigRational::new(mn.clone(), md.clone());
        match target.cmp(&mediant) {
            std::cmp::Ordering::Equal => {
                labels.push(one.clone());
                labels.push(two);
                return Ok(Word(labels));
            }
            std::cmp::Ordering::Less => {
                labels.push(one.clone());
                labels.push(one.clone());
                rn = mn;
                rd = md;
            }
            std::cmp::Ordering::Greater => {
                labels.push(two.clone());
                labels.push(two.clone());
                ln = mn;
                ld = md;
            }
        }
    }
}

/// Label-wise concatenation of [`rational_to_o`]; an embedding of the
/// rational tree into the binary tree `{1,2}*` preserving `⪯` and `⊑` in
/// both directions. Every label must be positive.
pub fn embed_word(w: &Word) -> Result<Word, TreeError> {
    let mut labels = Vec::new();
    for l in &w.0 {
        labels.extend(rational_to_o(l)?.0);
    }
    Ok(Word(labels))
}

/// The strictly monotone shift `q ↦ q − L + 1` that moves every label of an
/// instance into the positive rationals, where `L` is the least label seen.
#[derive(Debug, Clone)]
pub struct LabelNormalizer {
    offset: Rational,
}

impl LabelNormalizer {
    pub fn for_words<'a>(words: impl IntoIterator<Item = &'a Word>) -> LabelNormalizer {
        let min = words.into_iter().flat_map(|w| w.0.iter()).min().cloned();
        let offset = match min {
            Some(l) => Rational::one().sub(&l),
            None => Rational::zero(),
        };
        LabelNormalizer { offset }
    }

    pub fn apply(&self, w: &Word) -> Word {
        Word(w.0.iter().map(|l| l.add(&self.offset)).collect())
    }
}

/// Named constants, closed under prefixes. Names and values are unique;
/// entries are kept in lexicographic order of their values.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstantSet {
    entries: Vec<(String, Word)>,
}

pub fn is_valid_constant_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    // x<i>, y<i> and the temporal/boolean keywords are reserved.
    let reserved_var = |p: char| {
        name.len() > 1 && name.starts_with(p) && name[1..].chars().all(|c| c.is_ascii_digit())
    };
    let keyword = matches!(
        name,
        "X" | "G" | "F" | "U" | "R" | "true" | "false" | "eq" | "pref" | "lex" | "const"
    );
    !(reserved_var('x') || reserved_var('y') || keyword)
}

impl ConstantSet {
    /// Builds a constant set, rejecting sets that are not prefix-closed.
    pub fn new(entries: Vec<(String, Word)>) -> Result<ConstantSet, TreeError> {
        let set = ConstantSet::unchecked(entries)?;
        for (_, w) in &set.entries {
            for k in 0..w.len() {
                let p = w.prefix(k);
                if set.index_of_value(&p).is_none() {
                    return Err(TreeError::NotPrefixClosed(p));
                }
            }
        }
        Ok(set)
    }

    fn unchecked(entries: Vec<(String, Word)>) -> Result<ConstantSet, TreeError> {
        for (i, (name, value)) in entries.iter().enumerate() {
            if !is_valid_constant_name(name) {
                return Err(TreeError::BadName(name.clone()));
            }
            for (other, other_value) in &entries[..i] {
                if other == name {
                    return Err(TreeError::DuplicateName(name.clone()));
                }
                if other_value == value {
                    return Err(TreeError::DuplicateValue(other.clone(), name.clone()));
                }
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(ConstantSet { entries })
    }

    /// Builds a constant set and adds every missing prefix under a generated
    /// name of the form `pc_<labels>` (`pc_eps` for the root).
    pub fn closed(entries: Vec<(String, Word)>) -> Result<ConstantSet, TreeError> {
        let mut set = ConstantSet::unchecked(entries)?;
        let mut missing = Vec::new();
        for (_, w) in &set.entries {
            for k in 0..w.len() {
                let p = w.prefix(k);
                if set.index_of_value(&p).is_none() && !missing.contains(&p) {
                    missing.push(p);
                }
            }
        }
        missing.sort();
        for p in missing {
            let name = set.fresh_name(&p);
            set.entries.push((name, p));
        }
        set.entries.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(set)
    }

    /// A name for `w` that does not clash with the existing names.
    pub fn fresh_name(&self, w: &Word) -> String {
        let body: String = if w.is_empty() {
            "eps".to_string()
        } else {
            w.labels()
                .iter()
                .map(|l| l.to_string().replace('-', "m").replace('/', "d"))
                .collect::<Vec<_>>()
                .join("_")
        };
        let mut name = format!("pc_{body}");
        while self.index_of_name(&name).is_some() {
            name.push('_');
        }
        name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, Word)] {
        &self.entries
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn value(&self, i: usize) -> &Word {
        &self.entries[i].1
    }

    pub fn values(&self) -> impl Iterator<Item = &Word> {
        self.entries.iter().map(|(_, w)| w)
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn index_of_value(&self, w: &Word) -> Option<usize> {
        self.entries.iter().position(|(_, v)| v == w)
    }

    /// True for the root and for prefixes of constants. Such words are fixed
    /// by every type isomorphism, so gaps are never inserted there.
    pub fn is_fixed(&self, w: &Word) -> bool {
        w.is_empty() || self.entries.iter().any(|(_, c)| prefix_leq(w, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn prefix_examples() {
        assert!(prefix_leq(&w("eps"), &w("1")));
        assert!(!prefix_leq(&w("1.2"), &w("1")));
        assert!(prefix_leq(&w("1"), &w("1.2.3")));
    }

    #[test]
    fn lex_examples() {
        assert!(lex_leq(&w("1"), &w("1.1")));
        assert!(lex_leq(&w("1.5"), &w("2")));
        assert!(!lex_leq(&w("2"), &w("1.9")));
        assert!(lex_leq(&w("1/2"), &w("1")));
    }

    #[test]
    fn gcp_examples() {
        assert_eq!(gcp(&w("1.2"), &w("1.3")), w("1"));
        assert_eq!(gcp(&w("1.2"), &w("1.2")), w("1.2"));
        assert_eq!(gcp(&w("1"), &w("2")), w("eps"));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(insert_gap(&w("1"), 2, &w("1.3")), w("1.0.0.3"));
        assert_eq!(insert_gap(&w("1"), 2, &w("2")), w("2"));
        assert_eq!(insert_gap(&w("eps"), 0, &w("1")), w("1"));
        assert_eq!(insert_gap(&w("1"), 1, &w("1")), w("1.0"));
    }

    #[test]
    fn stern_brocot_examples() {
        assert_eq!(rational_to_o(&Rational::integer(1)).unwrap(), w("1.2"));
        assert_eq!(rational_to_o(&Rational::new(1, 2)).unwrap(), w("1.1.1.2"));
        assert_eq!(rational_to_o(&Rational::integer(2)).unwrap(), w("2.2.1.2"));
        assert!(rational_to_o(&Rational::zero()).is_err());
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_word(&w("eps")).unwrap(), w("eps"));
        assert_eq!(embed_word(&w("1")).unwrap(), w("1.2"));
        assert_eq!(embed_word(&w("1.2")).unwrap(), w("1.2.2.2.1.2"));
    }

    #[test]
    fn word_text_format() {
        let word = w("1.-1/2.3/6");
        assert_eq!(word.to_string(), "1.-1/2.1/2");
        assert_eq!(w("eps").to_string(), "eps");
        assert!("1..2".parse::<Word>().is_err());
        assert!("1/0".parse::<Word>().is_err());
        assert!("1/-2".parse::<Word>().is_err());
        assert!("".parse::<Word>().is_err());
        assert!("1 .2".parse::<Word>().is_err());
    }

    #[test]
    fn constant_sets() {
        let err = ConstantSet::new(vec![("c".into(), w("1.2"))]).unwrap_err();
        assert!(matches!(err, TreeError::NotPrefixClosed(_)));
        let set = ConstantSet::closed(vec![("c".into(), w("1.2"))]).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.index_of_value(&w("1")).is_some());
        assert!(set.is_fixed(&w("eps")));
        assert!(set.is_fixed(&w("1")));
        assert!(!set.is_fixed(&w("1.3")));
        let dup = ConstantSet::closed(vec![("a".into(), w("1")), ("b".into(), w("1"))]);
        assert!(matches!(dup, Err(TreeError::DuplicateValue(_, _))));
        assert!(ConstantSet::closed(vec![("x1".into(), w("1"))]).is_err());
        assert!(ConstantSet::default().is_fixed(&Word::empty()));
    }

    #[test]
    fn normalizer_shifts_to_positive() {
        let words = [w("-2.0"), w("3")];
        let norm = LabelNormalizer::for_words(words.iter());
        assert_eq!(norm.apply(&words[0]), w("1.3"));
        assert_eq!(norm.apply(&words[1]), w("6"));
    }
}
