//! Formula syntax trees, the formula file parser, and rendering.

use std::fmt;

use super::LogicError;
use crate::automata::{relation, variable, AutomatonError, Lexer, Rel, Tok};
use crate::tree::{ConstantSet, Word};

/// `X^shift x_index` (0-based index) or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LTerm {
    Var { index: usize, shift: usize },
    Const(usize),
}

impl LTerm {
    pub fn var(index: usize) -> LTerm {
        LTerm::Var { index, shift: 0 }
    }

    pub fn next(index: usize) -> LTerm {
        LTerm::Var { index, shift: 1 }
    }

    pub fn shift(self) -> usize {
        match self {
            LTerm::Var { shift, .. } => shift,
            LTerm::Const(_) => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom { rel: Rel, a: LTerm, b: LTerm },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Globally(Box<Formula>),
    Finally(Box<Formula>),
}

impl Formula {
    pub fn atom(rel: Rel, a: LTerm, b: LTerm) -> Formula {
        Formula::Atom { rel, a, b }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction of all parts; `true` when empty.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Disjunction of all parts; `false` when empty.
    pub fn any(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::Globally(Box::new(f))
    }

    pub fn finally(f: Formula) -> Formula {
        Formula::Finally(Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => Vec::new(),
            Formula::Not(a) | Formula::Next(a) | Formula::Globally(a) | Formula::Finally(a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => vec![a, b],
        }
    }

    pub fn atoms(&self, out: &mut Vec<(Rel, LTerm, LTerm)>) {
        if let Formula::Atom { rel, a, b } = self {
            out.push((*rel, *a, *b));
        }
        for c in self.children() {
            c.atoms(out);
        }
    }

    /// One more than the largest variable index (0 without variables).
    pub fn dim(&self) -> usize {
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        atoms
            .iter()
            .flat_map(|(_, a, b)| [a, b])
            .filter_map(|t| match t {
                LTerm::Var { index, .. } => Some(index + 1),
                LTerm::Const(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn max_shift(&self) -> usize {
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        atoms.iter().flat_map(|(_, a, b)| [a.shift(), b.shift()]).max().unwrap_or(0)
    }

    /// Whether no temporal operator occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Next(_)
            | Formula::Until(..)
            | Formula::Release(..)
            | Formula::Globally(_)
            | Formula::Finally(_) => false,
            _ => self.children().iter().all(|c| c.is_propositional()),
        }
    }

    /// Renames constants through `map` (old index to new index).
    pub fn map_consts(&self, map: &dyn Fn(usize) -> usize) -> Formula {
        let t = |t: &LTerm| match *t {
            LTerm::Const(c) => LTerm::Const(map(c)),
            v => v,
        };
        let b = |f: &Formula| Box::new(f.map_consts(map));
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom { rel, a, b: bb } => Formula::Atom { rel: *rel, a: t(a), b: t(bb) },
            Formula::Not(a) => Formula::Not(b(a)),
            Formula::Next(a) => Formula::Next(b(a)),
            Formula::Globally(a) => Formula::Globally(b(a)),
            Formula::Finally(a) => Formula::Finally(b(a)),
            Formula::And(x, y) => Formula::And(b(x), b(y)),
            Formula::Or(x, y) => Formula::Or(b(x), b(y)),
            Formula::Until(x, y) => Formula::Until(b(x), b(y)),
            Formula::Release(x, y) => Formula::Release(b(x), b(y)),
        }
    }

    pub fn display<'a>(&'a self, constants: &'a ConstantSet) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, constants }
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    constants: &'a ConstantSet,
}

fn write_term(t: &LTerm, c: &ConstantSet, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match *t {
        LTerm::Var { index, shift: 0 } => write!(out, "x{}", index + 1),
        LTerm::Var { index, shift: 1 } => write!(out, "X x{}", index + 1),
        LTerm::Var { index, shift } => write!(out, "X^{shift} x{}", index + 1),
        LTerm::Const(k) => write!(out, "{}", c.name(k)),
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.constants;
        let sub = |f: &'_ Formula| FormulaDisplay { f, constants: c }.to_string();
        match self.f {
            Formula::True => write!(out, "true"),
            Formula::False => write!(out, "false"),
            Formula::Atom { rel, a, b } => {
                write!(out, "{}(", rel.keyword())?;
                write_term(a, c, out)?;
                write!(out, ", ")?;
                write_term(b, c, out)?;
                write!(out, ")")
            }
            Formula::Not(a) => write!(out, "!{}", sub(a)),
            Formula::Next(a) => write!(out, "X {}", sub(a)),
            Formula::Globally(a) => write!(out, "G {}", sub(a)),
            Formula::Finally(a) => write!(out, "F {}", sub(a)),
            Formula::And(a, b) => write!(out, "({} & {})", sub(a), sub(b)),
            Formula::Or(a, b) => write!(out, "({} | {})", sub(a), sub(b)),
            Formula::Until(a, b) => write!(out, "({} U {})", sub(a), sub(b)),
            Formula::Release(a, b) => write!(out, "({} R {})", sub(a), sub(b)),
        }
    }
}

fn syntax(e: AutomatonError) -> LogicError {
    match e {
        AutomatonError::Syntax { offset, message } => LogicError::Syntax { offset, message },
        AutomatonError::UndeclaredSymbol { name, offset } => LogicError::UndeclaredConstant { name, offset },
        other => LogicError::Syntax { offset: 0, message: other.to_string() },
    }
}

/// Parses a formula over the declared `constants`.
pub fn parse_formula(src: &str, constants: &ConstantSet) -> Result<Formula, LogicError> {
    let mut lx = Lexer::new(src).map_err(syntax)?;
    let f = parse_or(&mut lx, constants)?;
    if *lx.peek() != Tok::Eof {
        return Err(syntax(lx.error("trailing input")));
    }
    Ok(f)
}

/// Parses a formula file: `const <name> = <word>;` header lines (`#` starts
/// a comment line), then one formula. The constants are closed under
/// prefixes.
pub fn parse_formula_file(text: &str) -> Result<(Formula, ConstantSet), LogicError> {
    let mut body = String::with_capacity(text.len());
    let mut entries: Vec<(String, Word)> = Vec::new();
    let mut offset = 0;
    let mut header = true;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if header && (t.starts_with('#') || t.is_empty()) {
            body.extend(line.chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
        } else if header && t.starts_with("const") && t[5..].starts_with(char::is_whitespace) {
            let bad = |message: &str| LogicError::Syntax { offset, message: message.into() };
            let stmt = t.strip_suffix(';').ok_or_else(|| bad("expected `;` after constant declaration"))?;
            let (name, value) = stmt[5..].split_once('=').ok_or_else(|| bad("expected `=` in constant declaration"))?;
            let name = name.trim();
            let value = value.trim().trim_matches('"');
            let word: Word = value.parse().map_err(|e: crate::tree::TreeError| bad(&e.to_string()))?;
            entries.push((name.to_string(), word));
            body.extend(line.chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
        } else {
            header = false;
            body.push_str(line);
        }
        offset += line.len();
    }
    let constants = ConstantSet::closed(entries)?;
    let f = parse_formula(&body, &constants)?;
    Ok((f, constants))
}

fn parse_or(lx: &mut Lexer, c: &ConstantSet) -> Result<Formula, LogicError> {
    let mut f = parse_and(lx, c)?;
    while *lx.peek() == Tok::Or {
        lx.next();
        f = Formula::or(f, parse_and(lx, c)?);
    }
    Ok(f)
}

fn parse_and(lx: &mut Lexer, c: &ConstantSet) -> Result<Formula, LogicError> {
    let mut f = parse_binary(lx, c)?;
    while *lx.peek() == Tok::And {
        lx.next();
        f = Formula::and(f, parse_binary(lx, c)?);
    }
    Ok(f)
}

/// `U` and `R`, right-associative.
fn parse_binary(lx: &mut Lexer, c: &ConstantSet) -> Result<Formula, LogicError> {
    let left = parse_unary(lx, c)?;
    match lx.peek() {
        Tok::Ident(op) if op == "U" => {
            lx.next();
            Ok(Formula::until(left, parse_binary(lx, c)?))
        }
        Tok::Ident(op) if op == "R" => {
            lx.next();
            Ok(Formula::release(left, parse_binary(lx, c)?))
        }
        _ => Ok(left),
    }
}

fn parse_unary(lx: &mut Lexer, c: &ConstantSet) -> Result<Formula, LogicError> {
    match lx.peek().clone() {
        Tok::Not => {
            lx.next();
            Ok(Formula::not(parse_unary(lx, c)?))
        }
        Tok::LParen => {
            lx.next();
            let f = parse_or(lx, c)?;
            lx.expect(Tok::RParen, "`)`").map_err(syntax)?;
            Ok(f)
        }
        Tok::Ident(name) => match name.as_str() {
            "true" => {
                lx.next();
                Ok(Formula::True)
            }
            "false" => {
                lx.next();
                Ok(Formula::False)
            }
            "X" => {
                lx.next();
                Ok(Formula::next(parse_unary(lx, c)?))
            }
            "G" => {
                lx.next();
                Ok(Formula::globally(parse_unary(lx, c)?))
            }
            "F" => {
                lx.next();
                Ok(Formula::finally(parse_unary(lx, c)?))
            }
            _ => {
                let rel = relation(&name).ok_or_else(|| syntax(lx.error(format!("unknown relation `{name}`"))))?;
                lx.next();
                lx.expect(Tok::LParen, "`(`").map_err(syntax)?;
                let a = parse_term(lx, c)?;
                lx.expect(Tok::Comma, "`,`").map_err(syntax)?;
                let b = parse_term(lx, c)?;
                lx.expect(Tok::RParen, "`)`").map_err(syntax)?;
                Ok(Formula::atom(rel, a, b))
            }
        },
        _ => Err(syntax(lx.error("expected a formula"))),
    }
}

/// `x<i>`, `X <term>`, `X^<n> <term>`, `Xx<i>`, or a constant name.
fn parse_term(lx: &mut Lexer, c: &ConstantSet) -> Result<LTerm, LogicError> {
    let off = lx.offset();
    let Tok::Ident(name) = lx.next() else {
        return Err(LogicError::Syntax { offset: off, message: "expected a term".into() });
    };
    if name == "X" {
        let k = if *lx.peek() == Tok::Caret {
            lx.next();
            let at = lx.offset();
            match lx.next() {
                Tok::Num(k) => k as usize,
                _ => return Err(LogicError::Syntax { offset: at, message: "expected an exponent".into() }),
            }
        } else {
            1
        };
        return Ok(match parse_term(lx, c)? {
            LTerm::Var { index, shift } => LTerm::Var { index, shift: shift + k },
            constant => constant,
        });
    }
    let xs = name.bytes().take_while(|&b| b == b'X').count();
    if let Some(('x', index)) = variable(&name[xs..]) {
        return Ok(LTerm::Var { index, shift: xs });
    }
    if let Some(k) = c.index_of_name(&name) {
        return Ok(LTerm::Const(k));
    }
    if variable(&name).is_some() {
        return Err(LogicError::Syntax { offset: off, message: format!("`{name}`: formulas use x<i> and X x<i>") });
    }
    Err(LogicError::UndeclaredConstant { name, offset: off })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let none = ConstantSet::default();
        let f = parse_formula("G pref(x1, X x1)", &none).unwrap();
        assert_eq!(f, Formula::globally(Formula::atom(Rel::Pref, LTerm::var(0), LTerm::next(0))));
        assert_eq!(parse_formula("G pref(x1,Xx1)", &none).unwrap(), f);
        let (u, c) = parse_formula_file("const c1 = 1;\n(pref(x1,c1) U eq(x1,c1))").unwrap();
        assert!(matches!(u, Formula::Until(..)));
        assert_eq!(c.len(), 2, "c1 and the root");
        let e = parse_formula("G pref(x1,", &none).unwrap_err();
        assert!(matches!(e, LogicError::Syntax { offset: 10, .. }), "{e:?}");
        assert!(matches!(parse_formula("eq(x1,c9)", &none), Err(LogicError::UndeclaredConstant { .. })));
        let t = parse_formula("pref(X^2 x1, x2)", &none).unwrap();
        assert_eq!(t, Formula::atom(Rel::Pref, LTerm::Var { index: 0, shift: 2 }, LTerm::var(1)));
    }

    #[test]
    fn display_round_trips() {
        let (f, c) = parse_formula_file("const c = 1.2;\n(!eq(x1,c) U X G lex(X^3 x2, pc_1)) R F eq(x1, Xx2)").unwrap();
        let text = f.display(&c).to_string();
        assert_eq!(parse_formula(&text, &c).unwrap(), f);
        assert!(parse_formula("F x1_eq", &c).is_err());
    }
}
