//! ASCII concrete syntax.
//!
//! `e` is the empty string, `E` the empty set, `.` concatenation, `+` union,
//! `&` intersection, `-` restriction, `~` prefix complement, `?` and `*`
//! postfix option and star. The printer always emits the fully parenthesized
//! canonical form, e.g. `((0.1)*)`. The parser also accepts lighter input
//! using the precedence (tightest first) postfix, `~`, `.`, `&`, `-`, `+`;
//! binary operators associate to the left. Whitespace between tokens is
//! ignored.

use std::fmt;

use thiserror::Error;

use crate::regex::{Alphabet, Op, OperatorSet, Regex, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character {0:?}")]
    Unexpected(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unbalanced ')'")]
    Unbalanced,
    #[error("symbol {0:?} is not in the alphabet")]
    ForeignSymbol(char),
    #[error("operator {0:?} is not allowed")]
    OperatorNotAllowed(Op),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

/// Parses `text` as a regex over `sigma`, rejecting constructors outside `ops`.
pub fn parse(text: &str, sigma: &Alphabet, ops: OperatorSet) -> Result<Regex, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        sigma,
        ops,
    };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(p.error(ParseErrorKind::Empty));
    }
    let r = p.union()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(r),
        Some(b')') => Err(p.error(ParseErrorKind::Unbalanced)),
        Some(c) => Err(p.error(ParseErrorKind::Unexpected(c as char))),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    sigma: &'a Alphabet,
    ops: OperatorSet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            pos: self.pos,
            kind,
        }
    }

    fn allow(&self, op: Op, at: usize) -> Result<(), ParseError> {
        if self.ops.contains(op) {
            Ok(())
        } else {
            Err(ParseError {
                pos: at,
                kind: ParseErrorKind::OperatorNotAllowed(op),
            })
        }
    }

    /// Parses one left-associative level: `next (glyph next)*`.
    fn binary_level(
        &mut self,
        glyph: u8,
        op: Op,
        next: fn(&mut Self) -> Result<Regex, ParseError>,
    ) -> Result<Regex, ParseError> {
        let mut lhs = next(self)?;
        loop {
            self.skip_ws();
            if self.peek() != Some(glyph) {
                return Ok(lhs);
            }
            self.allow(op, self.pos)?;
            self.pos += 1;
            let rhs = next(self)?;
            lhs = Regex::binary(op, lhs, rhs);
        }
    }

    fn union(&mut self) -> Result<Regex, ParseError> {
        self.binary_level(b'+', Op::Or, Self::minus)
    }

    fn minus(&mut self) -> Result<Regex, ParseError> {
        self.binary_level(b'-', Op::Minus, Self::inter)
    }

    fn inter(&mut self) -> Result<Regex, ParseError> {
        self.binary_level(b'&', Op::And, Self::concat)
    }

    fn concat(&mut self) -> Result<Regex, ParseError> {
        self.binary_level(b'.', Op::Concat, Self::prefix)
    }

    fn prefix(&mut self) -> Result<Regex, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'~') {
            self.allow(Op::Complement, self.pos)?;
            self.pos += 1;
            return Ok(Regex::complement(self.prefix()?));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Regex, ParseError> {
        let mut r = self.atom()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'?') => Op::Option,
                Some(b'*') => Op::Star,
                _ => return Ok(r),
            };
            self.allow(op, self.pos)?;
            self.pos += 1;
            r = Regex::unary(op, r);
        }
    }

    fn atom(&mut self) -> Result<Regex, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let c = self
            .peek()
            .ok_or_else(|| self.error(ParseErrorKind::UnexpectedEnd))?;
        match c {
            b'(' => {
                self.pos += 1;
                let r = self.union()?;
                self.skip_ws();
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(r)
                    }
                    None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
                    Some(c) => Err(self.error(ParseErrorKind::Unexpected(c as char))),
                }
            }
            b'e' => {
                self.allow(Op::Epsilon, at)?;
                self.pos += 1;
                Ok(Regex::Epsilon)
            }
            b'E' => {
                self.allow(Op::EmptySet, at)?;
                self.pos += 1;
                Ok(Regex::EmptySet)
            }
            b')' => Err(self.error(ParseErrorKind::Unbalanced)),
            c if self.sigma.contains(c) => {
                self.allow(Op::Literal, at)?;
                self.pos += 1;
                Ok(Regex::Literal(Symbol(c)))
            }
            c if c.is_ascii_alphanumeric() => {
                Err(self.error(ParseErrorKind::ForeignSymbol(c as char)))
            }
            c => Err(self.error(ParseErrorKind::Unexpected(c as char))),
        }
    }
}

/// Writes the canonical fully parenthesized form.
pub fn write_canonical(r: &Regex, out: &mut impl fmt::Write) -> fmt::Result {
    match r {
        Regex::EmptySet => out.write_char('E'),
        Regex::Epsilon => out.write_char('e'),
        Regex::Literal(s) => out.write_char(s.as_char()),
        Regex::Option(c) | Regex::Star(c) => {
            out.write_char('(')?;
            write_canonical(c, out)?;
            out.write_char(r.op().glyph().unwrap())?;
            out.write_char(')')
        }
        Regex::Complement(c) => {
            out.write_str("(~")?;
            write_canonical(c, out)?;
            out.write_char(')')
        }
        Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
            out.write_char('(')?;
            write_canonical(a, out)?;
            out.write_char(r.op().glyph().unwrap())?;
            write_canonical(b, out)?;
            out.write_char(')')
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_canonical(self, f)
    }
}

/// Canonical printed form.
pub fn print(r: &Regex) -> String {
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(text: &str) -> Result<Regex, ParseError> {
        parse(text, &Alphabet::binary(), OperatorSet::FULL)
    }

    fn lit(c: char) -> Regex {
        Regex::lit(c)
    }

    #[test]
    fn parses_reference_examples() {
        assert_eq!(
            full("((0.1)*)").unwrap(),
            Regex::star(Regex::concat(lit('0'), lit('1')))
        );
        assert_eq!(full("e").unwrap(), Regex::Epsilon);
        let expected = Regex::complement(Regex::concat(
            Regex::option(lit('1')),
            Regex::minus(
                Regex::star(Regex::concat(lit('0'), Regex::option(lit('1')))),
                lit('0'),
            ),
        ));
        assert_eq!(full("(~((1?).(((0.(1?))*)-0)))").unwrap(), expected);
    }

    #[test]
    fn prints_canonical_forms() {
        assert_eq!(
            print(&Regex::star(Regex::concat(lit('0'), lit('1')))),
            "((0.1)*)"
        );
        assert_eq!(print(&Regex::EmptySet), "E");
        let r = Regex::or(
            lit('0'),
            Regex::concat(Regex::complement(lit('1')), lit('1')),
        );
        assert_eq!(print(&r), "(0+((~1).1))");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(full("0.1*").unwrap(), full("(0.(1*))").unwrap());
        assert_eq!(full("~1*").unwrap(), full("(~(1*))").unwrap());
        assert_eq!(full("~1.0").unwrap(), full("((~1).0)").unwrap());
        assert_eq!(full("0+1.0").unwrap(), full("(0+(1.0))").unwrap());
        assert_eq!(full("0-1-0").unwrap(), full("((0-1)-0)").unwrap());
        assert_eq!(full("0+1-0&1").unwrap(), full("(0+(1-(0&1)))").unwrap());
        assert_eq!(full("0.1.0").unwrap(), full("((0.1).0)").unwrap());
        assert_eq!(full("0**?").unwrap(), full("(((0*)*)?)").unwrap());
        assert_eq!(
            full(" ( 0 * ) . ( 0 + ( 1 . 1 ) ) ").unwrap(),
            full("((0*).(0+(1.1)))").unwrap()
        );
    }

    #[test]
    fn reports_error_positions() {
        assert_eq!(full("").unwrap_err().kind, ParseErrorKind::Empty);
        let e = full("((").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(e.pos, 2);
        let e = full("(0.2)").unwrap_err();
        assert_eq!((e.pos, e.kind), (3, ParseErrorKind::ForeignSymbol('2')));
        let e = full("0)").unwrap_err();
        assert_eq!((e.pos, e.kind), (1, ParseErrorKind::Unbalanced));
        let e = full("0 1").unwrap_err();
        assert_eq!((e.pos, e.kind), (2, ParseErrorKind::Unexpected('1')));
        let e = full("0.").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn rejects_operators_outside_set() {
        let e = parse("(~1)", &Alphabet::binary(), OperatorSet::REDUCED).unwrap_err();
        assert_eq!(
            (e.pos, e.kind),
            (1, ParseErrorKind::OperatorNotAllowed(Op::Complement))
        );
        let e = parse("E", &Alphabet::binary(), OperatorSet::REDUCED).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::OperatorNotAllowed(Op::EmptySet));
        let e = parse("(0&1)", &Alphabet::binary(), OperatorSet::REDUCED).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::OperatorNotAllowed(Op::And));
        assert!(parse("((1?)+(0*))", &Alphabet::binary(), OperatorSet::REDUCED).is_ok());
    }

    #[test]
    fn other_alphabets() {
        let sigma = Alphabet::new("ab").unwrap();
        let r = parse("(a.(b*))", &sigma, OperatorSet::FULL).unwrap();
        assert_eq!(print(&r), "(a.(b*))");
        assert!(parse("0", &sigma, OperatorSet::FULL).is_err());
    }
}
