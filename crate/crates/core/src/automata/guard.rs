//! Quantifier-free constraint formulas over current (`x̄`) and next (`ȳ`)
//! values and named constants, kept in negation normal form.

use std::fmt;

use super::AutomatonError;
use crate::order_types::{OrderType, ShapeIndex, ROOT};
use crate::tree::{lex_leq, prefix_leq, ConstantSet, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Pref,
    Lex,
}

impl Rel {
    pub fn keyword(self) -> &'static str {
        match self {
            Rel::Eq => "eq",
            Rel::Pref => "pref",
            Rel::Lex => "lex",
        }
    }

    pub fn holds(self, a: &Word, b: &Word) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Pref => prefix_leq(a, b),
            Rel::Lex => lex_leq(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Current value of variable i (0-based).
    X(usize),
    /// Next value of variable i (0-based).
    Y(usize),
    /// Constant by index in the constant set.
    Const(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    True,
    False,
    Atom { rel: Rel, a: Term, b: Term, neg: bool },
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn atom(rel: Rel, a: Term, b: Term) -> Guard {
        Guard::Atom { rel, a, b, neg: false }
    }

    /// Conjunction with light simplification.
    pub fn and(parts: Vec<Guard>) -> Guard {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Guard::True => {}
                Guard::False => return Guard::False,
                Guard::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        out.dedup();
        match out.len() {
            0 => Guard::True,
            1 => out.pop().unwrap(),
            _ => Guard::And(out),
        }
    }

    /// Disjunction with light simplification.
    pub fn or(parts: Vec<Guard>) -> Guard {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Guard::False => {}
                Guard::True => return Guard::True,
                Guard::Or(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        out.dedup();
        match out.len() {
            0 => Guard::False,
            1 => out.pop().unwrap(),
            _ => Guard::Or(out),
        }
    }

    pub fn negate(&self) -> Guard {
        match self {
            Guard::True => Guard::False,
            Guard::False => Guard::True,
            Guard::Atom { rel, a, b, neg } => Guard::Atom { rel: *rel, a: *a, b: *b, neg: !neg },
            Guard::And(v) => Guard::or(v.iter().map(Guard::negate).collect()),
            Guard::Or(v) => Guard::and(v.iter().map(Guard::negate).collect()),
        }
    }

    /// Evaluates with the given interpretation of atoms.
    pub fn eval(&self, atom: &impl Fn(Rel, Term, Term) -> bool) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Atom { rel, a, b, neg } => atom(*rel, *a, *b) != *neg,
            Guard::And(v) => v.iter().all(|g| g.eval(atom)),
            Guard::Or(v) => v.iter().any(|g| g.eval(atom)),
        }
    }

    /// Kleene evaluation: `None` where an atom is not yet determined.
    pub fn eval3(&self, atom: &impl Fn(Rel, Term, Term) -> Option<bool>) -> Option<bool> {
        match self {
            Guard::True => Some(true),
            Guard::False => Some(false),
            Guard::Atom { rel, a, b, neg } => atom(*rel, *a, *b).map(|v| v != *neg),
            Guard::And(v) => {
                let mut all = Some(true);
                for g in v {
                    match g.eval3(atom) {
                        Some(false) => return Some(false),
                        None => all = None,
                        Some(true) => {}
                    }
                }
                all
            }
            Guard::Or(v) => {
                let mut any = Some(false);
                for g in v {
                    match g.eval3(atom) {
                        Some(true) => return Some(true),
                        None => any = None,
                        Some(false) => {}
                    }
                }
                any
            }
        }
    }

    /// Truth on concrete current and next tuples.
    pub fn eval_words(&self, x: &[Word], y: &[Word], constants: &ConstantSet) -> bool {
        let val = |t: Term| -> &Word {
            match t {
                Term::X(i) => &x[i],
                Term::Y(i) => &y[i],
                Term::Const(c) => constants.value(c),
            }
        };
        self.eval(&|rel, a, b| rel.holds(val(a), val(b)))
    }

    /// Truth on a pair type (`x̄` = first group, `ȳ` = second group).
    pub fn eval_type(&self, t: &OrderType) -> bool {
        let n = t.dim();
        let node = |term: Term| match term {
            Term::X(i) => t.node_of(i),
            Term::Y(i) => t.node_of(n + i),
            Term::Const(c) => t.const_node(c).expect("constant present in type"),
        };
        self.eval(&|rel, a, b| {
            let (a, b) = (node(a), node(b));
            match rel {
                Rel::Eq => a == b,
                Rel::Pref => t.ancestor_eq(a, b),
                Rel::Lex => t.lex_le(a, b),
            }
        })
    }

    /// Kleene truth on a packed shape where `x_i` sits at position `xoff + i`
    /// and `y_i` at `yoff + i`; positions not yet placed are undetermined.
    pub fn eval_shape(&self, idx: &ShapeIndex, xoff: usize, yoff: usize) -> Option<bool> {
        let node = |term: Term| -> Option<usize> {
            let v = match term {
                Term::X(i) => idx.pos[xoff + i],
                Term::Y(i) => idx.pos[yoff + i],
                Term::Const(c) => idx.cnode[c],
            };
            (v != ROOT).then_some(v as usize)
        };
        self.eval3(&|rel, a, b| {
            let (a, b) = (node(a)?, node(b)?);
            Some(match rel {
                Rel::Eq => a == b,
                Rel::Pref => idx.ancestor_eq(a, b),
                Rel::Lex => a <= b,
            })
        })
    }

    pub fn terms(&self, out: &mut Vec<Term>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Atom { a, b, .. } => {
                out.push(*a);
                out.push(*b);
            }
            Guard::And(v) | Guard::Or(v) => v.iter().for_each(|g| g.terms(out)),
        }
    }

    /// One more than the largest variable index used.
    pub fn dim(&self) -> usize {
        let mut ts = Vec::new();
        self.terms(&mut ts);
        ts.iter()
            .filter_map(|t| match t {
                Term::X(i) | Term::Y(i) => Some(i + 1),
                Term::Const(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Renames constant indices.
    pub fn map_consts(&self, f: &impl Fn(usize) -> usize) -> Guard {
        let m = |t: Term| match t {
            Term::Const(c) => Term::Const(f(c)),
            other => other,
        };
        match self {
            Guard::Atom { rel, a, b, neg } => Guard::Atom { rel: *rel, a: m(*a), b: m(*b), neg: *neg },
            Guard::And(v) => Guard::And(v.iter().map(|g| g.map_consts(f)).collect()),
            Guard::Or(v) => Guard::Or(v.iter().map(|g| g.map_consts(f)).collect()),
            g => g.clone(),
        }
    }

    pub fn display<'a>(&'a self, constants: &'a ConstantSet) -> GuardDisplay<'a> {
        GuardDisplay { guard: self, constants }
    }
}

pub struct GuardDisplay<'a> {
    guard: &'a Guard,
    constants: &'a ConstantSet,
}

fn term_text(t: Term, constants: &ConstantSet) -> String {
    match t {
        Term::X(i) => format!("x{}", i + 1),
        Term::Y(i) => format!("y{}", i + 1),
        Term::Const(c) => constants.name(c).to_string(),
    }
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(g: &Guard, c: &ConstantSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match g {
                Guard::True => f.write_str("true"),
                Guard::False => f.write_str("false"),
                Guard::Atom { rel, a, b, neg } => {
                    if *neg {
                        f.write_str("!")?;
                    }
                    write!(f, "{}({},{})", rel.keyword(), term_text(*a, c), term_text(*b, c))
                }
                Guard::And(v) | Guard::Or(v) => {
                    let sep = if matches!(g, Guard::And(_)) { " & " } else { " | " };
                    f.write_str("(")?;
                    for (i, h) in v.iter().enumerate() {
                        if i > 0 {
                            f.write_str(sep)?;
                        }
                        go(h, c, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        go(self.guard, self.constants, f)
    }
}

// ---------------------------------------------------------------------------
// Lexer shared with the formula parser.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
    Caret,
    Eof,
}

pub(crate) struct Lexer {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Lexer {
    pub(crate) fn new(src: &str) -> Result<Lexer, AutomatonError> {
        let bytes = src.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            let tok = match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'&' => Tok::And,
                b'|' => Tok::Or,
                b'!' => Tok::Not,
                b'^' => Tok::Caret,
                b'0'..=b'9' => {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let n = src[start..i].parse().map_err(|_| AutomatonError::Syntax {
                        offset: start,
                        message: "number too large".into(),
                    })?;
                    toks.push((Tok::Num(n), start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    toks.push((Tok::Ident(src[start..i].to_string()), start));
                    continue;
                }
                _ => {
                    return Err(AutomatonError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", src[start..].chars().next().unwrap()),
                    })
                }
            };
            toks.push((tok, start));
            i += 1;
        }
        toks.push((Tok::Eof, src.len()));
        Ok(Lexer { toks, at: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> AutomatonError {
        AutomatonError::Syntax { offset: self.offset(), message: message.into() }
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> Result<(), AutomatonError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }
}

/// `x<i>` / `y<i>` with i ≥ 1, returning the group letter and 0-based index.
pub(crate) fn variable(name: &str) -> Option<(char, usize)> {
    let mut chars = name.chars();
    let g = chars.next()?;
    if g != 'x' && g != 'y' {
        return None;
    }
    let rest = &name[1..];
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse::<usize>().ok().map(|i| (g, i - 1))
}

pub(crate) fn relation(name: &str) -> Option<Rel> {
    match name {
        "eq" => Some(Rel::Eq),
        "pref" => Some(Rel::Pref),
        "lex" => Some(Rel::Lex),
        _ => None,
    }
}

/// Parses a guard, resolving constant names against `constants`.
pub fn parse_guard(src: &str, constants: &ConstantSet) -> Result<Guard, AutomatonError> {
    let mut lx = Lexer::new(src)?;
    let g = parse_or(&mut lx, constants)?;
    if *lx.peek() != Tok::Eof {
        return Err(lx.error("trailing input"));
    }
    Ok(g)
}

fn parse_or(lx: &mut Lexer, c: &ConstantSet) -> Result<Guard, AutomatonError> {
    let mut parts = vec![parse_and(lx, c)?];
    while *lx.peek() == Tok::Or {
        lx.next();
        parts.push(parse_and(lx, c)?);
    }
    Ok(Guard::or(parts))
}

fn parse_and(lx: &mut Lexer, c: &ConstantSet) -> Result<Guard, AutomatonError> {
    let mut parts = vec![parse_unary(lx, c)?];
    while *lx.peek() == Tok::And {
        lx.next();
        parts.push(parse_unary(lx, c)?);
    }
    Ok(Guard::and(parts))
}

fn parse_unary(lx: &mut Lexer, c: &ConstantSet) -> Result<Guard, AutomatonError> {
    match lx.peek().clone() {
        Tok::Not => {
            lx.next();
            Ok(parse_unary(lx, c)?.negate())
        }
        Tok::LParen => {
            lx.next();
            let g = parse_or(lx, c)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(g)
        }
        Tok::Ident(name) if name == "true" => {
            lx.next();
            Ok(Guard::True)
        }
        Tok::Ident(name) if name == "false" => {
            lx.next();
            Ok(Guard::False)
        }
        Tok::Ident(name) => {
            let rel = relation(&name).ok_or_else(|| lx.error(format!("unknown relation `{name}`")))?;
            lx.next();
            lx.expect(Tok::LParen, "`(`")?;
            let a = parse_term(lx, c)?;
            lx.expect(Tok::Comma, "`,`")?;
            let b = parse_term(lx, c)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(Guard::atom(rel, a, b))
        }
        _ => Err(lx.error("expected an atom, `!`, `(`, `true` or `false`")),
    }
}

fn parse_term(lx: &mut Lexer, c: &ConstantSet) -> Result<Term, AutomatonError> {
    let off = lx.offset();
    match lx.next() {
        Tok::Ident(name) => {
            if let Some((g, i)) = variable(&name) {
                return Ok(if g == 'x' { Term::X(i) } else { Term::Y(i) });
            }
            c.index_of_name(&name)
                .map(Term::Const)
                .ok_or(AutomatonError::UndeclaredSymbol { name, offset: off })
        }
        _ => Err(AutomatonError::Syntax { offset: off, message: "expected a term".into() }),
    }
}
