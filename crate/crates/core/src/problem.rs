//! PN-sets and inference instances.

use std::collections::HashSet;

use thiserror::Error;

use crate::regex::{Alphabet, CostFunction, OperatorSet, Regex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("string {0:?} is both positive and negative")]
    Overlap(String),
    #[error("string {0:?} appears twice")]
    Duplicate(String),
    #[error("string {word:?} uses symbol {symbol:?} outside the alphabet")]
    ForeignSymbol { word: String, symbol: char },
    #[error("cost function has a zero entry")]
    InvalidCost,
}

/// Positive and negative example strings. Order is preserved; it fixes the
/// layout of solver footprints and of token encodings.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct PnSet {
    pub pos: Vec<String>,
    pub neg: Vec<String>,
}

impl PnSet {
    pub fn new<S: Into<String>>(
        pos: impl IntoIterator<Item = S>,
        neg: impl IntoIterator<Item = S>,
    ) -> Self {
        PnSet {
            pos: pos.into_iter().map(Into::into).collect(),
            neg: neg.into_iter().map(Into::into).collect(),
        }
    }

    /// Checks distinctness, disjointness and that every symbol is in `sigma`.
    pub fn validate(&self, sigma: &Alphabet) -> Result<(), ProblemError> {
        let mut seen_pos = HashSet::new();
        for w in &self.pos {
            if !seen_pos.insert(w.as_str()) {
                return Err(ProblemError::Duplicate(w.clone()));
            }
        }
        let mut seen_neg = HashSet::new();
        for w in &self.neg {
            if seen_pos.contains(w.as_str()) {
                return Err(ProblemError::Overlap(w.clone()));
            }
            if !seen_neg.insert(w.as_str()) {
                return Err(ProblemError::Duplicate(w.clone()));
            }
        }
        for w in self.pos.iter().chain(&self.neg) {
            if let Some(symbol) = sigma.first_foreign(w) {
                return Err(ProblemError::ForeignSymbol {
                    word: w.clone(),
                    symbol,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// Number of strings `r` classifies correctly, as (positives accepted, negatives rejected).
    pub fn classify(&self, r: &Regex) -> (usize, usize) {
        let p = self
            .pos
            .iter()
            .filter(|w| crate::matcher::matches(r, w))
            .count();
        let n = self
            .neg
            .iter()
            .filter(|w| !crate::matcher::matches(r, w))
            .count();
        (p, n)
    }

    pub fn is_precise(&self, r: &Regex) -> bool {
        crate::matcher::is_precise(r, &self.pos, &self.neg)
    }
}

/// One inference problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub alphabet: Alphabet,
    pub pn: PnSet,
    pub cf: CostFunction,
    pub ops: OperatorSet,
}

impl Instance {
    pub fn new(id: impl Into<String>, pn: PnSet, cf: CostFunction, ops: OperatorSet) -> Self {
        Instance {
            id: id.into(),
            alphabet: Alphabet::binary(),
            pn,
            cf: cf.restricted(ops),
            ops,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if !self.cf.is_valid() {
            return Err(ProblemError::InvalidCost);
        }
        self.pn.validate(&self.alphabet)
    }

    pub fn cost(&self, r: &Regex) -> u64 {
        r.cost(&self.cf)
    }
}
