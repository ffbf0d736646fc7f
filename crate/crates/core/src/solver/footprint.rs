//! Footprints: for a fixed list of example strings, which substrings a regex
//! matches.
//!
//! For each string `w` of length `L` the footprint holds an upper triangular
//! `(L+1) x (L+1)` boolean matrix `M` with `M[i][j]` set iff the regex matches
//! `w[i..j)`. The packed key concatenates the triangles of all strings
//! (positives in input order, then negatives), each triangle row-major with
//! row `i` covering columns `i..=L`, into little-endian 64-bit words.
//!
//! Two regexes with the same footprint are interchangeable as subterms for
//! every string in the list, which is what makes deduplication by footprint
//! sound. Every combinator below is computed from the operand footprints only.

use std::fmt;

use crate::regex::{Op, Symbol};

/// Longest example string supported; a row of the matrix must fit in a `u64`.
pub const MAX_STRING_LEN: usize = 63;

#[derive(Clone, Copy, Debug)]
struct Span {
    /// Bit offset of row 0.
    offset: usize,
    len: usize,
}

impl Span {
    #[inline]
    fn row_offset(&self, i: usize) -> usize {
        // Rows 0..i have widths L+1, L, ..., L+2-i.
        self.offset + i * (self.len + 1) - i * i.saturating_sub(1) / 2
    }
}

/// Bit layout shared by all footprints of one instance.
#[derive(Clone)]
pub struct FootprintLayout {
    strings: Vec<Vec<u8>>,
    positives: usize,
    spans: Vec<Span>,
    bits: usize,
    words: usize,
    valid: Vec<u64>,
    diagonal: Vec<u64>,
    accept_mask: Vec<u64>,
    accept_want: Vec<u64>,
}

#[inline]
fn get_bits(words: &[u64], offset: usize, width: usize) -> u64 {
    let w = offset / 64;
    let b = offset % 64;
    let mut v = words[w] >> b;
    if b + width > 64 {
        v |= words[w + 1] << (64 - b);
    }
    if width == 64 {
        v
    } else {
        v & ((1u64 << width) - 1)
    }
}

/// ORs `value` (at most `width` bits) into the bit range starting at `offset`.
#[inline]
fn or_bits(words: &mut [u64], offset: usize, width: usize, value: u64) {
    let w = offset / 64;
    let b = offset % 64;
    words[w] |= value << b;
    if b + width > 64 {
        words[w + 1] |= value >> (64 - b);
    }
}

fn set_bit(words: &mut [u64], bit: usize) {
    words[bit / 64] |= 1 << (bit % 64);
}

impl FootprintLayout {
    /// Layout for `pos` followed by `neg`. Panics if a string is longer than
    /// [`MAX_STRING_LEN`].
    pub fn new<S: AsRef<str>>(pos: &[S], neg: &[S]) -> Self {
        let strings: Vec<Vec<u8>> = pos
            .iter()
            .chain(neg)
            .map(|s| s.as_ref().as_bytes().to_vec())
            .collect();
        let mut spans = Vec::with_capacity(strings.len());
        let mut offset = 0;
        for s in &strings {
            assert!(
                s.len() <= MAX_STRING_LEN,
                "example strings are limited to {MAX_STRING_LEN} symbols"
            );
            spans.push(Span {
                offset,
                len: s.len(),
            });
            offset += (s.len() + 1) * (s.len() + 2) / 2;
        }
        let bits = offset;
        let words = bits.div_ceil(64).max(1);
        let mut layout = FootprintLayout {
            strings,
            positives: pos.len(),
            spans,
            bits,
            words,
            valid: vec![0; words],
            diagonal: vec![0; words],
            accept_mask: vec![0; words],
            accept_want: vec![0; words],
        };
        for bit in 0..bits {
            set_bit(&mut layout.valid, bit);
        }
        for (idx, span) in layout.spans.clone().iter().enumerate() {
            for i in 0..=span.len {
                set_bit(&mut layout.diagonal, span.row_offset(i));
            }
            let whole = span.row_offset(0) + span.len;
            set_bit(&mut layout.accept_mask, whole);
            if idx < layout.positives {
                set_bit(&mut layout.accept_want, whole);
            }
        }
        layout
    }

    /// Number of 64-bit words per footprint.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn strings(&self) -> impl Iterator<Item = &[u8]> {
        self.strings.iter().map(|s| s.as_slice())
    }

    pub fn num_strings(&self) -> usize {
        self.strings.len()
    }

    /// Position of `M_w[i][j]` in the packed key, for string index `s`.
    pub fn bit_index(&self, s: usize, i: usize, j: usize) -> usize {
        let span = self.spans[s];
        assert!(i <= j && j <= span.len, "({i}, {j}) outside the triangle");
        span.row_offset(i) + (j - i)
    }

    pub fn get(&self, fp: &[u64], s: usize, i: usize, j: usize) -> bool {
        let bit = self.bit_index(s, i, j);
        fp[bit / 64] >> (bit % 64) & 1 == 1
    }

    /// True iff the footprint accepts every positive and rejects every negative.
    #[inline]
    pub fn is_precise(&self, fp: &[u64]) -> bool {
        fp.iter()
            .zip(&self.accept_mask)
            .zip(&self.accept_want)
            .all(|((f, m), w)| f & m == *w)
    }

    /// Writes the footprint of a leaf. `sym` is only read for [`Op::Literal`].
    pub fn leaf_into(&self, op: Op, sym: Option<Symbol>, out: &mut [u64]) {
        out.fill(0);
        match op {
            Op::EmptySet => {}
            Op::Epsilon => out.copy_from_slice(&self.diagonal),
            Op::Literal => {
                let a = sym.expect("literal leaf needs a symbol").0;
                for (s, w) in self.strings.iter().enumerate() {
                    for (i, &c) in w.iter().enumerate() {
                        if c == a {
                            set_bit(out, self.spans[s].row_offset(i) + 1);
                        }
                    }
                }
            }
            _ => panic!("{op:?} is not a leaf"),
        }
    }

    /// Writes `op(a, b)` into `out`. `b` is ignored for unary operators.
    #[inline]
    pub fn combine_into(&self, op: Op, a: &[u64], b: &[u64], out: &mut [u64]) {
        match op {
            Op::Or => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = x | y;
                }
            }
            Op::And => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = x & y;
                }
            }
            Op::Minus => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = x & !y;
                }
            }
            Op::Complement => {
                for ((o, x), v) in out.iter_mut().zip(a).zip(&self.valid) {
                    *o = !x & v;
                }
            }
            Op::Option => {
                for ((o, x), d) in out.iter_mut().zip(a).zip(&self.diagonal) {
                    *o = x | d;
                }
            }
            Op::Concat => {
                out.fill(0);
                for span in &self.spans {
                    concat_triangle(span, a, b, out);
                }
            }
            Op::Star => {
                out.fill(0);
                for span in &self.spans {
                    star_triangle(span, a, out);
                }
            }
            Op::EmptySet | Op::Epsilon | Op::Literal => panic!("{op:?} is a leaf"),
        }
    }

    pub fn combine(&self, op: Op, a: &Footprint, b: Option<&Footprint>) -> Footprint {
        let mut out = vec![0; self.words];
        let b = b.map(|f| &f.0[..]).unwrap_or(&a.0[..]);
        self.combine_into(op, &a.0, b, &mut out);
        Footprint(out.into_boxed_slice())
    }

    pub fn leaf(&self, op: Op, sym: Option<Symbol>) -> Footprint {
        let mut out = vec![0; self.words];
        self.leaf_into(op, sym, &mut out);
        Footprint(out.into_boxed_slice())
    }
}

/// Boolean matrix product restricted to one string: `C[i][j] = OR_k A[i][k] & B[k][j]`.
#[inline]
fn concat_triangle(span: &Span, a: &[u64], b: &[u64], out: &mut [u64]) {
    let n = span.len + 1;
    let mut brow = [0u64; MAX_STRING_LEN + 1];
    let mut off = span.offset;
    for (k, row) in brow.iter_mut().enumerate().take(n) {
        *row = get_bits(b, off, n - k) << k;
        off += n - k;
    }
    let mut off = span.offset;
    for i in 0..n {
        let width = n - i;
        let mut arow = get_bits(a, off, width) << i;
        let mut acc = 0u64;
        while arow != 0 {
            acc |= brow[arow.trailing_zeros() as usize];
            arow &= arow - 1;
        }
        or_bits(out, off, width, acc >> i);
        off += width;
    }
}

/// Reflexive-transitive closure restricted to one string. Rows are filled
/// bottom-up: `R[i] = {i} u OR_{k > i, A[i][k]} R[k]`.
#[inline]
fn star_triangle(span: &Span, a: &[u64], out: &mut [u64]) {
    let n = span.len + 1;
    let mut closure = [0u64; MAX_STRING_LEN + 1];
    for i in (0..n).rev() {
        let off = span.row_offset(i);
        let width = n - i;
        let mut arow = (get_bits(a, off, width) << i) & !(1u64 << i);
        let mut acc = 1u64 << i;
        while arow != 0 {
            acc |= closure[arow.trailing_zeros() as usize];
            arow &= arow - 1;
        }
        closure[i] = acc;
        or_bits(out, off, width, acc >> i);
    }
}

/// An owned footprint in the packed layout of some [`FootprintLayout`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Footprint(pub Box<[u64]>);

impl Footprint {
    pub fn words(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Debug for Footprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Footprint(")?;
        for w in self.0.iter() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}
