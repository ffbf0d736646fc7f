//! Independent reference implementations used by the integration tests.
//!
//! Nothing here touches the solver's footprints or deduplication. The AST
//! enumerator lists every tree of a given size, and the naive minimum-cost
//! search evaluates every tree separately over bitset languages of short
//! strings.

#![allow(dead_code)]

use rei_core::matcher::all_strings;
use rei_core::regex::{Alphabet, Op, OperatorSet, Regex, Symbol};

/// Every regex tree with exactly `size` nodes built from `ops` over `sigma`,
/// indexed by size: `out[k]` holds the trees of size `k` (`out[0]` is empty).
pub fn trees_up_to(ops: OperatorSet, sigma: &Alphabet, size: usize) -> Vec<Vec<Regex>> {
    let mut out: Vec<Vec<Regex>> = vec![Vec::new()];
    for k in 1..=size {
        let mut level = Vec::new();
        if k == 1 {
            if ops.contains(Op::EmptySet) {
                level.push(Regex::EmptySet);
            }
            if ops.contains(Op::Epsilon) {
                level.push(Regex::Epsilon);
            }
            if ops.contains(Op::Literal) {
                level.extend(sigma.symbols().map(Regex::Literal));
            }
        } else {
            for op in Op::UNARY.into_iter().filter(|&o| ops.contains(o)) {
                level.extend(out[k - 1].iter().map(|c| Regex::unary(op, c.clone())));
            }
            for op in Op::BINARY.into_iter().filter(|&o| ops.contains(o)) {
                for left in 1..k - 1 {
                    for a in &out[left] {
                        for b in &out[k - 1 - left] {
                            level.push(Regex::binary(op, a.clone(), b.clone()));
                        }
                    }
                }
            }
        }
        out.push(level);
    }
    out
}

/// Languages restricted to strings of length at most `max_len` over a small
/// alphabet, as bitmasks over the strings listed shortest first.
pub struct BitLangs {
    strings: Vec<String>,
    universe: u32,
    literal: Vec<u32>,
    /// `prefix_table[u][b]`: strings `u v` with `v` in mask `b`, for `|u v| <= max_len`.
    prefix_table: Vec<Vec<u32>>,
    star_table: Vec<u32>,
}

impl BitLangs {
    /// Panics unless the number of strings is at most 16.
    pub fn new(sigma: &Alphabet, max_len: usize) -> Self {
        let strings = all_strings(sigma, max_len);
        assert!(strings.len() <= 16, "too many strings for the table oracle");
        let n = strings.len();
        let index = |w: &str| strings.iter().position(|s| s == w);
        let universe = ((1u64 << n) - 1) as u32;
        let literal = sigma
            .symbols()
            .map(|s| index(&s.as_char().to_string()).map_or(0, |i| 1 << i))
            .collect();
        let mut prefix_table = vec![vec![0u32; 1 << n]; n];
        for (u, pu) in strings.iter().zip(prefix_table.iter_mut()) {
            // Per-string images, then extended over masks by the lowest set bit.
            let single: Vec<u32> = strings
                .iter()
                .map(|v| index(&format!("{u}{v}")).map_or(0, |i| 1 << i))
                .collect();
            for b in 1..(1usize << n) {
                let low = b.trailing_zeros() as usize;
                pu[b] = pu[b & (b - 1)] | single[low];
            }
        }
        let mut langs = BitLangs {
            strings,
            universe,
            literal,
            prefix_table,
            star_table: Vec::new(),
        };
        let mut star_table = vec![0u32; 1 << n];
        for (m, slot) in star_table.iter_mut().enumerate() {
            let mut acc = 1u32;
            loop {
                let next = acc | langs.concat(m as u32, acc);
                if next == acc {
                    break;
                }
                acc = next;
            }
            *slot = acc;
        }
        langs.star_table = star_table;
        langs
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn mask_of<S: AsRef<str>>(&self, words: &[S]) -> u32 {
        words.iter().fold(0, |m, w| {
            let i = self
                .strings
                .iter()
                .position(|s| s == w.as_ref())
                .expect("string in range");
            m | 1 << i
        })
    }

    pub fn concat(&self, a: u32, b: u32) -> u32 {
        let mut out = 0;
        let mut rest = a;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            out |= self.prefix_table[u][b as usize];
            rest &= rest - 1;
        }
        out
    }

    pub fn apply(&self, op: Op, a: u32, b: u32) -> u32 {
        match op {
            Op::Option => a | 1,
            Op::Star => self.star_table[a as usize],
            Op::Complement => self.universe & !a,
            Op::Concat => self.concat(a, b),
            Op::And => a & b,
            Op::Or => a | b,
            Op::Minus => a & !b,
            Op::EmptySet | Op::Epsilon | Op::Literal => unreachable!("leaf"),
        }
    }

    pub fn lang(&self, r: &Regex) -> u32 {
        match r {
            Regex::EmptySet => 0,
            Regex::Epsilon => 1,
            Regex::Literal(Symbol(b)) => {
                let i = self.strings.iter().position(|s| s.as_bytes() == [*b]);
                i.map_or(0, |i| 1 << i)
            }
            Regex::Option(c) | Regex::Star(c) | Regex::Complement(c) => {
                self.apply(r.op(), self.lang(c), 0)
            }
            Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => {
                self.apply(r.op(), self.lang(a), self.lang(b))
            }
        }
    }
}

/// Smallest uniform cost of a regex over `ops` accepting exactly the strings
/// of `pos` and none of `neg`, found by enumerating every tree by size with
/// no merging of equivalent trees. Returns `None` if nothing up to
/// `max_size` works.
pub fn naive_min_uniform_cost(
    langs: &BitLangs,
    ops: OperatorSet,
    pos: &[String],
    neg: &[String],
    max_size: usize,
) -> Option<usize> {
    let want = langs.mask_of(pos);
    let reject = langs.mask_of(neg);
    let ok = |m: u32| m & want == want && m & reject == 0;
    let mut levels: Vec<Vec<u16>> = vec![Vec::new()];
    for k in 1..=max_size {
        let mut level: Vec<u16> = Vec::new();
        let push = |m: u32, level: &mut Vec<u16>| -> bool {
            if ok(m) {
                return true;
            }
            level.push(m as u16);
            false
        };
        if k == 1 {
            let mut leaves = Vec::new();
            if ops.contains(Op::EmptySet) {
                leaves.push(0);
            }
            if ops.contains(Op::Epsilon) {
                leaves.push(1);
            }
            if ops.contains(Op::Literal) {
                leaves.extend(langs.literal.iter().copied());
            }
            for m in leaves {
                if push(m, &mut level) {
                    return Some(k);
                }
            }
        } else {
            for op in Op::UNARY.into_iter().filter(|&o| ops.contains(o)) {
                for &a in &levels[k - 1] {
                    let m = langs.apply(op, a as u32, 0);
                    if push(m, &mut level) {
                        return Some(k);
                    }
                }
            }
            for op in Op::BINARY.into_iter().filter(|&o| ops.contains(o)) {
                for left in 1..k - 1 {
                    let right = k - 1 - left;
                    for &a in &levels[left] {
                        for &b in &levels[right] {
                            let m = langs.apply(op, a as u32, b as u32);
                            if push(m, &mut level) {
                                return Some(k);
                            }
                        }
                    }
                }
            }
        }
        levels.push(level);
    }
    None
}
