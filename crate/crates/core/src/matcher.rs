//! Membership testing by Brzozowski derivatives, plus a bounded-language
//! enumerator used as an independent oracle.
//!
//! Derivatives are built through smart constructors that apply a handful of
//! language-preserving rewrites (`r+E = r`, `E.r = E`, `e.r = r`, `~~r = r`,
//! `r** = r*`, idempotent union, ...). Without them derivative terms grow
//! quickly; with them the terms stay small for the short strings this crate
//! deals with.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::regex::{Alphabet, Regex, Symbol};

/// True iff the empty string is in the language of `r`.
pub fn nullable(r: &Regex) -> bool {
    match r {
        Regex::EmptySet | Regex::Literal(_) => false,
        Regex::Epsilon | Regex::Option(_) | Regex::Star(_) => true,
        Regex::Complement(c) => !nullable(c),
        Regex::Concat(a, b) | Regex::And(a, b) => nullable(a) && nullable(b),
        Regex::Or(a, b) => nullable(a) || nullable(b),
        Regex::Minus(a, b) => nullable(a) && !nullable(b),
    }
}

fn mk_or(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::EmptySet, r) | (r, Regex::EmptySet) => r,
        (a, b) if a == b => a,
        (a, b) => Regex::or(a, b),
    }
}

fn mk_concat(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::EmptySet, _) | (_, Regex::EmptySet) => Regex::EmptySet,
        (Regex::Epsilon, r) | (r, Regex::Epsilon) => r,
        (a, b) => Regex::concat(a, b),
    }
}

fn mk_and(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::EmptySet, _) | (_, Regex::EmptySet) => Regex::EmptySet,
        (a, b) if a == b => a,
        (a, b) => Regex::and(a, b),
    }
}

fn mk_minus(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::EmptySet, _) => Regex::EmptySet,
        (r, Regex::EmptySet) => r,
        (a, b) if a == b => Regex::EmptySet,
        (a, b) => Regex::minus(a, b),
    }
}

fn mk_complement(r: Regex) -> Regex {
    match r {
        Regex::Complement(inner) => *inner,
        r => Regex::complement(r),
    }
}

/// The Brzozowski derivative of `r` with respect to `a`:
/// a regex for `{ w | a w in L(r) }`.
pub fn derivative(r: &Regex, a: Symbol) -> Regex {
    match r {
        Regex::EmptySet | Regex::Epsilon => Regex::EmptySet,
        Regex::Literal(b) => {
            if *b == a {
                Regex::Epsilon
            } else {
                Regex::EmptySet
            }
        }
        Regex::Option(c) => derivative(c, a),
        Regex::Star(c) => mk_concat(derivative(c, a), r.clone()),
        Regex::Complement(c) => mk_complement(derivative(c, a)),
        Regex::Concat(x, y) => {
            let left = mk_concat(derivative(x, a), (**y).clone());
            if nullable(x) {
                mk_or(left, derivative(y, a))
            } else {
                left
            }
        }
        Regex::And(x, y) => mk_and(derivative(x, a), derivative(y, a)),
        Regex::Or(x, y) => mk_or(derivative(x, a), derivative(y, a)),
        Regex::Minus(x, y) => mk_minus(derivative(x, a), derivative(y, a)),
    }
}

/// Decides `w in L(r)` with one derivative step per symbol of `w`.
pub fn matches(r: &Regex, w: &str) -> bool {
    let mut bytes = w.bytes();
    let Some(first) = bytes.next() else {
        return nullable(r);
    };
    let mut cur = derivative(r, Symbol(first));
    for b in bytes {
        if cur == Regex::EmptySet {
            return false;
        }
        cur = derivative(&cur, Symbol(b));
    }
    nullable(&cur)
}

/// True iff `r` accepts every string of `pos` and rejects every string of `neg`.
pub fn is_precise<S: AsRef<str>>(r: &Regex, pos: &[S], neg: &[S]) -> bool {
    pos.iter().all(|w| matches(r, w.as_ref())) && !neg.iter().any(|w| matches(r, w.as_ref()))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error(
    "enumerating strings up to length {max_len} over {sigma_len} symbols exceeds the cap of {cap}"
)]
pub struct TooLarge {
    pub max_len: usize,
    pub sigma_len: usize,
    pub cap: u64,
}

/// Default cap on `|sigma|^(max_len + 1)` for [`bounded_language`].
pub const BOUNDED_CAP: u64 = 1 << 20;

/// All strings over `sigma` of exactly length `len`, in symbol order.
pub fn all_strings_of_len(sigma: &Alphabet, len: usize) -> Vec<String> {
    let mut layer = vec![String::new()];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|w| sigma.symbols().map(move |s| format!("{w}{s}")))
            .collect();
    }
    layer
}

/// All strings over `sigma` of length at most `max_len`, shortest first.
pub fn all_strings(sigma: &Alphabet, max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * sigma.len());
        for w in &layer {
            for s in sigma.symbols() {
                let mut v = w.clone();
                v.push(s.as_char());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `L(r)` restricted to strings of length at most `max_len`, computed by direct
/// set recursion on the language clauses (never through derivatives).
pub fn bounded_language(
    r: &Regex,
    sigma: &Alphabet,
    max_len: usize,
) -> Result<BTreeSet<String>, TooLarge> {
    bounded_language_capped(r, sigma, max_len, BOUNDED_CAP)
}

pub fn bounded_language_capped(
    r: &Regex,
    sigma: &Alphabet,
    max_len: usize,
    cap: u64,
) -> Result<BTreeSet<String>, TooLarge> {
    let too_large = TooLarge {
        max_len,
        sigma_len: sigma.len(),
        cap,
    };
    let size = (sigma.len() as u64)
        .checked_pow(max_len as u32 + 1)
        .ok_or(too_large)?;
    if size > cap {
        return Err(TooLarge {
            max_len,
            sigma_len: sigma.len(),
            cap,
        });
    }
    let universe: BTreeSet<String> = all_strings(sigma, max_len).into_iter().collect();
    Ok(Bounded {
        max_len,
        universe: &universe,
    }
    .lang(r))
}

struct Bounded<'a> {
    max_len: usize,
    universe: &'a BTreeSet<String>,
}

impl Bounded<'_> {
    fn concat(&self, a: &BTreeSet<String>, b: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for u in a {
            for v in b {
                if u.len() + v.len() <= self.max_len {
                    out.insert(format!("{u}{v}"));
                }
            }
        }
        out
    }

    fn lang(&self, r: &Regex) -> BTreeSet<String> {
        match r {
            Regex::EmptySet => BTreeSet::new(),
            Regex::Epsilon => BTreeSet::from([String::new()]),
            Regex::Literal(s) => {
                if self.max_len >= 1 {
                    BTreeSet::from([s.as_char().to_string()])
                } else {
                    BTreeSet::new()
                }
            }
            Regex::Option(c) => {
                let mut l = self.lang(c);
                l.insert(String::new());
                l
            }
            Regex::Star(c) => {
                // Least fixpoint of S = {e} u L(c).S within the length bound.
                let base = self.lang(c);
                let mut acc = BTreeSet::from([String::new()]);
                loop {
                    let next: BTreeSet<String> =
                        acc.union(&self.concat(&base, &acc)).cloned().collect();
                    if next.len() == acc.len() {
                        return acc;
                    }
                    acc = next;
                }
            }
            Regex::Complement(c) => self.universe.difference(&self.lang(c)).cloned().collect(),
            Regex::Concat(a, b) => self.concat(&self.lang(a), &self.lang(b)),
            Regex::And(a, b) => self.lang(a).intersection(&self.lang(b)).cloned().collect(),
            Regex::Or(a, b) => self.lang(a).union(&self.lang(b)).cloned().collect(),
            Regex::Minus(a, b) => self.lang(a).difference(&self.lang(b)).cloned().collect(),
        }
    }
}
