//! Abstract syntax for extended regular expressions over a small alphabet,
//! together with the operator sets and cost functions that parameterize an
//! inference problem.
//!
//! The grammar has ten constructors: the empty set, the empty string, single
//! symbols, the postfix operators `?` and `*`, prefix complement `~`, and the
//! binary operators concatenation `.`, intersection `&`, union `+` and
//! restriction `-`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters that carry meaning in the concrete syntax and therefore cannot
/// be used as alphabet symbols.
pub const RESERVED: &[u8] = b"eE.+&-~?*()[] \t\r\n";

/// A single alphabet character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn as_char(self) -> char {
        self.0 as char
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("alphabet symbol {0:?} is reserved by the regex syntax")]
    Reserved(char),
    #[error("alphabet symbol {0:?} is not printable ASCII")]
    NotAscii(char),
    #[error("alphabet symbol {0:?} is listed twice")]
    Duplicate(char),
}

/// An ordered, duplicate-free set of symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<u8>);

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Self, AlphabetError> {
        let mut out: Vec<u8> = Vec::with_capacity(symbols.len());
        for c in symbols.chars() {
            if !c.is_ascii_graphic() {
                return Err(AlphabetError::NotAscii(c));
            }
            let b = c as u8;
            if RESERVED.contains(&b) {
                return Err(AlphabetError::Reserved(c));
            }
            if out.contains(&b) {
                return Err(AlphabetError::Duplicate(c));
            }
            out.push(b);
        }
        if out.is_empty() {
            return Err(AlphabetError::Empty);
        }
        out.sort_unstable();
        Ok(Alphabet(out))
    }

    /// The alphabet `{0, 1}` used throughout the challenge datasets.
    pub fn binary() -> Self {
        Alphabet(vec![b'0', b'1'])
    }

    pub fn contains(&self, b: u8) -> bool {
        self.0.contains(&b)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|&b| Symbol(b))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns the first byte of `word` that is not in the alphabet.
    pub fn first_foreign(&self, word: &str) -> Option<char> {
        word.bytes().find(|b| !self.contains(*b)).map(|b| b as char)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::binary()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b as char)?;
        }
        Ok(())
    }
}

/// A regular expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    EmptySet,
    Epsilon,
    Literal(Symbol),
    Option(Box<Regex>),
    Star(Box<Regex>),
    Complement(Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    And(Box<Regex>, Box<Regex>),
    Or(Box<Regex>, Box<Regex>),
    Minus(Box<Regex>, Box<Regex>),
}

impl Regex {
    pub fn lit(c: char) -> Regex {
        Regex::Literal(Symbol(c as u8))
    }

    pub fn option(r: Regex) -> Regex {
        Regex::Option(Box::new(r))
    }

    pub fn star(r: Regex) -> Regex {
        Regex::Star(Box::new(r))
    }

    pub fn complement(r: Regex) -> Regex {
        Regex::Complement(Box::new(r))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn and(a: Regex, b: Regex) -> Regex {
        Regex::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Regex, b: Regex) -> Regex {
        Regex::Or(Box::new(a), Box::new(b))
    }

    pub fn minus(a: Regex, b: Regex) -> Regex {
        Regex::Minus(Box::new(a), Box::new(b))
    }

    /// Builds a unary node for `op`. Panics if `op` is not unary.
    pub fn unary(op: Op, r: Regex) -> Regex {
        match op {
            Op::Option => Regex::option(r),
            Op::Star => Regex::star(r),
            Op::Complement => Regex::complement(r),
            _ => panic!("{op:?} is not a unary operator"),
        }
    }

    /// Builds a binary node for `op`. Panics if `op` is not binary.
    pub fn binary(op: Op, a: Regex, b: Regex) -> Regex {
        match op {
            Op::Concat => Regex::concat(a, b),
            Op::And => Regex::and(a, b),
            Op::Or => Regex::or(a, b),
            Op::Minus => Regex::minus(a, b),
            _ => panic!("{op:?} is not a binary operator"),
        }
    }

    /// The regex `a1 . (a2 . (... . an))` matching exactly `word`; `e` for the empty word.
    pub fn word(word: &str) -> Regex {
        let mut syms = word.bytes().rev();
        match syms.next() {
            None => Regex::Epsilon,
            Some(last) => syms.fold(Regex::Literal(Symbol(last)), |acc, b| {
                Regex::concat(Regex::Literal(Symbol(b)), acc)
            }),
        }
    }

    /// The constructor at the root of this tree.
    pub fn op(&self) -> Op {
        match self {
            Regex::EmptySet => Op::EmptySet,
            Regex::Epsilon => Op::Epsilon,
            Regex::Literal(_) => Op::Literal,
            Regex::Option(_) => Op::Option,
            Regex::Star(_) => Op::Star,
            Regex::Complement(_) => Op::Complement,
            Regex::Concat(..) => Op::Concat,
            Regex::And(..) => Op::And,
            Regex::Or(..) => Op::Or,
            Regex::Minus(..) => Op::Minus,
        }
    }

    /// Number of nodes (leaves and operators).
    pub fn size(&self) -> usize {
        match self {
            Regex::EmptySet | Regex::Epsilon | Regex::Literal(_) => 1,
            Regex::Option(r) | Regex::Star(r) | Regex::Complement(r) => 1 + r.size(),
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Regex::EmptySet | Regex::Epsilon | Regex::Literal(_) => 1,
            Regex::Option(r) | Regex::Star(r) | Regex::Complement(r) => 1 + r.depth(),
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Sum of leaf and operator costs. Parentheses are free.
    pub fn cost(&self, cf: &CostFunction) -> u64 {
        match self {
            Regex::EmptySet | Regex::Epsilon | Regex::Literal(_) => cf.atom,
            Regex::Option(r) | Regex::Star(r) | Regex::Complement(r) => {
                cf.of(self.op()) + r.cost(cf)
            }
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                cf.of(self.op()) + a.cost(cf) + b.cost(cf)
            }
        }
    }

    /// The exact set of constructors occurring in the tree.
    pub fn operators_used(&self) -> OperatorSet {
        let mut set = OperatorSet::EMPTY;
        self.collect_ops(&mut set);
        set
    }

    fn collect_ops(&self, set: &mut OperatorSet) {
        set.insert(self.op());
        match self {
            Regex::EmptySet | Regex::Epsilon | Regex::Literal(_) => {}
            Regex::Option(r) | Regex::Star(r) | Regex::Complement(r) => r.collect_ops(set),
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                a.collect_ops(set);
                b.collect_ops(set);
            }
        }
    }

    /// Returns the first literal whose symbol lies outside `sigma`.
    pub fn foreign_symbol(&self, sigma: &Alphabet) -> Option<Symbol> {
        match self {
            Regex::Literal(s) if !sigma.contains(s.0) => Some(*s),
            Regex::EmptySet | Regex::Epsilon | Regex::Literal(_) => None,
            Regex::Option(r) | Regex::Star(r) | Regex::Complement(r) => r.foreign_symbol(sigma),
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                a.foreign_symbol(sigma).or_else(|| b.foreign_symbol(sigma))
            }
        }
    }
}

/// The ten constructors of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    EmptySet,
    Epsilon,
    Literal,
    Option,
    Star,
    Complement,
    Concat,
    And,
    Or,
    Minus,
}

impl Op {
    pub const ALL: [Op; 10] = [
        Op::EmptySet,
        Op::Epsilon,
        Op::Literal,
        Op::Option,
        Op::Star,
        Op::Complement,
        Op::Concat,
        Op::And,
        Op::Or,
        Op::Minus,
    ];
    pub const UNARY: [Op; 3] = [Op::Option, Op::Star, Op::Complement];
    pub const BINARY: [Op; 4] = [Op::Concat, Op::And, Op::Or, Op::Minus];

    pub fn is_leaf(self) -> bool {
        matches!(self, Op::EmptySet | Op::Epsilon | Op::Literal)
    }

    pub fn is_unary(self) -> bool {
        matches!(self, Op::Option | Op::Star | Op::Complement)
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Op::Concat | Op::And | Op::Or | Op::Minus)
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, Op::And | Op::Or)
    }

    /// The ASCII glyph used by the concrete syntax. Literals have no fixed glyph.
    pub fn glyph(self) -> Option<char> {
        Some(match self {
            Op::EmptySet => 'E',
            Op::Epsilon => 'e',
            Op::Literal => return None,
            Op::Option => '?',
            Op::Star => '*',
            Op::Complement => '~',
            Op::Concat => '.',
            Op::And => '&',
            Op::Or => '+',
            Op::Minus => '-',
        })
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

/// A set of allowed constructors.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorSet(u16);

impl OperatorSet {
    pub const EMPTY: OperatorSet = OperatorSet(0);
    /// `{e, a, ?, *, ., +}`: no complement, intersection, restriction or empty set.
    pub const REDUCED: OperatorSet = OperatorSet(
        (1 << Op::Epsilon as u16)
            | (1 << Op::Literal as u16)
            | (1 << Op::Option as u16)
            | (1 << Op::Star as u16)
            | (1 << Op::Concat as u16)
            | (1 << Op::Or as u16),
    );
    pub const FULL: OperatorSet = OperatorSet((1 << 10) - 1);

    pub fn from_ops(ops: impl IntoIterator<Item = Op>) -> Self {
        let mut set = OperatorSet::EMPTY;
        for op in ops {
            set.insert(op);
        }
        set
    }

    pub fn contains(self, op: Op) -> bool {
        self.0 & op.bit() != 0
    }

    pub fn insert(&mut self, op: Op) {
        self.0 |= op.bit();
    }

    pub fn is_subset(self, other: OperatorSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Op> {
        Op::ALL.into_iter().filter(move |op| self.contains(*op))
    }

    pub fn name(self) -> Option<&'static str> {
        if self == OperatorSet::REDUCED {
            Some("reduced")
        } else if self == OperatorSet::FULL {
            Some("full")
        } else {
            None
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "reduced" => Some(OperatorSet::REDUCED),
            "full" => Some(OperatorSet::FULL),
            _ => None,
        }
    }
}

impl fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Cost used for operators that an instance does not allow. Far above any
/// trivial solution of a generated instance, so such operators never pay off.
pub const DISABLED_COST: u64 = 1_000_000;

/// Per-constructor costs. `atom` is shared by the empty set, the empty
/// string and every literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostFunction {
    pub atom: u64,
    pub option: u64,
    pub star: u64,
    pub complement: u64,
    pub concat: u64,
    pub and: u64,
    pub or: u64,
    pub minus: u64,
}

impl CostFunction {
    pub const UNIFORM: CostFunction = CostFunction {
        atom: 1,
        option: 1,
        star: 1,
        complement: 1,
        concat: 1,
        and: 1,
        or: 1,
        minus: 1,
    };

    pub fn of(&self, op: Op) -> u64 {
        match op {
            Op::EmptySet | Op::Epsilon | Op::Literal => self.atom,
            Op::Option => self.option,
            Op::Star => self.star,
            Op::Complement => self.complement,
            Op::Concat => self.concat,
            Op::And => self.and,
            Op::Or => self.or,
            Op::Minus => self.minus,
        }
    }

    pub fn set(&mut self, op: Op, value: u64) {
        let slot = match op {
            Op::EmptySet | Op::Epsilon | Op::Literal => &mut self.atom,
            Op::Option => &mut self.option,
            Op::Star => &mut self.star,
            Op::Complement => &mut self.complement,
            Op::Concat => &mut self.concat,
            Op::And => &mut self.and,
            Op::Or => &mut self.or,
            Op::Minus => &mut self.minus,
        };
        *slot = value;
    }

    pub fn is_valid(&self) -> bool {
        [
            self.atom,
            self.option,
            self.star,
            self.complement,
            self.concat,
            self.and,
            self.or,
            self.minus,
        ]
        .iter()
        .all(|&c| c >= 1)
    }

    /// Copy with the cost of every non-leaf operator outside `ops` set to [`DISABLED_COST`].
    pub fn restricted(mut self, ops: OperatorSet) -> Self {
        for op in [
            Op::Option,
            Op::Star,
            Op::Complement,
            Op::Concat,
            Op::And,
            Op::Or,
            Op::Minus,
        ] {
            if !ops.contains(op) {
                self.set(op, DISABLED_COST);
            }
        }
        self
    }
}

impl Default for CostFunction {
    fn default() -> Self {
        CostFunction::UNIFORM
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weighted_cost_156() -> CostFunction {
        CostFunction {
            atom: 20,
            option: 8,
            star: 3,
            concat: 45,
            or: 38,
            ..CostFunction::UNIFORM
        }
    }

    #[test]
    fn cost_of_star_concat_is_four() {
        let r = Regex::star(Regex::concat(Regex::lit('0'), Regex::lit('1')));
        assert_eq!(r.cost(&CostFunction::UNIFORM), 4);
    }

    #[test]
    fn variable_cost_example() {
        // (0.((1.(0*))*))
        let r = Regex::concat(
            Regex::lit('0'),
            Regex::star(Regex::concat(Regex::lit('1'), Regex::star(Regex::lit('0')))),
        );
        assert_eq!(r.cost(&weighted_cost_156()), 156);
    }

    #[test]
    fn leaf_costs_atom() {
        let cf = weighted_cost_156();
        for r in [
            Regex::EmptySet,
            Regex::Epsilon,
            Regex::lit('0'),
            Regex::lit('1'),
        ] {
            assert_eq!(r.cost(&cf), 20);
        }
    }

    #[test]
    fn operators_used_walks_whole_tree() {
        let r = Regex::star(Regex::concat(Regex::lit('0'), Regex::lit('1')));
        assert_eq!(
            r.operators_used(),
            OperatorSet::from_ops([Op::Literal, Op::Concat, Op::Star])
        );
        assert_eq!(
            Regex::Epsilon.operators_used(),
            OperatorSet::from_ops([Op::Epsilon])
        );
        let r = Regex::or(
            Regex::lit('0'),
            Regex::concat(Regex::complement(Regex::lit('1')), Regex::lit('1')),
        );
        assert_eq!(
            r.operators_used(),
            OperatorSet::from_ops([Op::Literal, Op::Or, Op::Complement, Op::Concat])
        );
    }

    #[test]
    fn reduced_is_subset_of_full() {
        assert!(OperatorSet::REDUCED.is_subset(OperatorSet::FULL));
        assert!(!OperatorSet::FULL.is_subset(OperatorSet::REDUCED));
        for op in [Op::Literal, Op::Concat, Op::Or] {
            assert!(OperatorSet::REDUCED.contains(op));
        }
        for op in [Op::EmptySet, Op::Complement, Op::And, Op::Minus] {
            assert!(!OperatorSet::REDUCED.contains(op));
        }
    }

    #[test]
    fn word_is_right_nested() {
        assert_eq!(Regex::word(""), Regex::Epsilon);
        assert_eq!(
            Regex::word("011"),
            Regex::concat(
                Regex::lit('0'),
                Regex::concat(Regex::lit('1'), Regex::lit('1'))
            )
        );
    }

    #[test]
    fn alphabet_rejects_reserved_symbols() {
        assert_eq!(Alphabet::new("0e"), Err(AlphabetError::Reserved('e')));
        assert_eq!(Alphabet::new("00"), Err(AlphabetError::Duplicate('0')));
        assert_eq!(Alphabet::new(""), Err(AlphabetError::Empty));
        assert_eq!(Alphabet::new("10").unwrap(), Alphabet::binary());
    }
}
