//! Heuristic baselines: the trivial regex, PN retrieval and RE retrieval.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::problem::Instance;
use crate::regex::Regex;

/// The union of all positive strings, right-nested in input order. Each string
/// is a right-nested concatenation of its symbols; the empty string is `e`.
/// With no positives this is `E`.
pub fn trivial(inst: &Instance) -> Regex {
    let mut words = inst.pn.pos.iter().rev();
    match words.next() {
        None => Regex::EmptySet,
        Some(last) => words.fold(Regex::word(last), |acc, w| Regex::or(Regex::word(w), acc)),
    }
}

/// A training instance with its gold solution.
#[derive(Clone, Debug)]
pub struct Solved {
    pub instance: Instance,
    pub regex: Regex,
}

/// Training instances indexed for the retrieval baselines.
#[derive(Clone, Debug, Default)]
pub struct TrainCorpus {
    entries: Vec<Solved>,
    /// Distinct gold regexes keyed by canonical form.
    regexes: BTreeMap<String, Regex>,
}

impl TrainCorpus {
    /// Builds a corpus. Entries whose gold regex is not precise for their own
    /// instance are returned as errors by id.
    pub fn new(entries: Vec<Solved>) -> Result<Self, String> {
        let mut regexes = BTreeMap::new();
        for e in &entries {
            if !e.instance.pn.is_precise(&e.regex) {
                return Err(e.instance.id.clone());
            }
            regexes
                .entry(e.regex.to_string())
                .or_insert_with(|| e.regex.clone());
        }
        Ok(TrainCorpus { entries, regexes })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distinct_regexes(&self) -> impl Iterator<Item = (&str, &Regex)> {
        self.regexes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn entries(&self) -> &[Solved] {
        &self.entries
    }
}

/// Labeled agreement between two PN-sets: shared positives plus shared negatives.
pub fn pn_overlap(a: &Instance, b: &Instance) -> usize {
    let shared = |x: &[String], y: &[String]| x.iter().filter(|w| y.contains(w)).count();
    shared(&a.pn.pos, &b.pn.pos) + shared(&a.pn.neg, &b.pn.neg)
}

fn usable(inst: &Instance, r: &Regex) -> bool {
    r.operators_used().is_subset(inst.ops) && r.foreign_symbol(&inst.alphabet).is_none()
}

/// Orders candidates by lower cost under `inst`, then canonical form.
fn cheaper(inst: &Instance, a: (&str, &Regex), b: (&str, &Regex)) -> Ordering {
    inst.cost(a.1)
        .cmp(&inst.cost(b.1))
        .then_with(|| a.0.cmp(b.0))
}

/// Gold regex of the training instance with the largest PN overlap. Ties go to
/// the cheapest regex under `inst`'s cost function, then the least canonical
/// form. Training regexes using operators `inst` does not allow are skipped.
pub fn pn_retrieval(inst: &Instance, corpus: &TrainCorpus) -> Option<Regex> {
    let mut best: Option<(usize, String, &Regex)> = None;
    for e in &corpus.entries {
        if !usable(inst, &e.regex) {
            continue;
        }
        let overlap = pn_overlap(inst, &e.instance);
        let text = e.regex.to_string();
        let better = match &best {
            None => true,
            Some((o, t, r)) => {
                overlap > *o
                    || (overlap == *o && cheaper(inst, (&text, &e.regex), (t, r)) == Ordering::Less)
            }
        };
        if better {
            best = Some((overlap, text, &e.regex));
        }
    }
    best.map(|(_, _, r)| r.clone())
}

/// The distinct corpus regex classifying most of `inst`'s strings correctly.
/// Ties go to the cheapest under `inst`'s cost function, then the least
/// canonical form.
pub fn re_retrieval(inst: &Instance, corpus: &TrainCorpus) -> Option<Regex> {
    let mut best: Option<(usize, &str, &Regex)> = None;
    for (text, r) in corpus.distinct_regexes() {
        if !usable(inst, r) {
            continue;
        }
        let (p, n) = inst.pn.classify(r);
        let correct = p + n;
        let better = match &best {
            None => true,
            Some((c, t, b)) => {
                correct > *c
                    || (correct == *c && cheaper(inst, (text, r), (t, b)) == Ordering::Less)
            }
        };
        if better {
            best = Some((correct, text, r));
        }
    }
    best.map(|(_, _, r)| r.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::PnSet;
    use crate::regex::{Alphabet, CostFunction, OperatorSet};
    use crate::syntax::parse;

    fn inst(id: &str, pos: &[&str], neg: &[&str]) -> Instance {
        Instance::new(
            id,
            PnSet::new(pos.iter().copied(), neg.iter().copied()),
            CostFunction::UNIFORM,
            OperatorSet::FULL,
        )
    }

    fn re(t: &str) -> Regex {
        parse(t, &Alphabet::binary(), OperatorSet::FULL).unwrap()
    }

    #[test]
    fn trivial_examples() {
        assert_eq!(
            trivial(&inst("a", &["0101"], &[])).to_string(),
            "(0.(1.(0.1)))"
        );
        assert_eq!(trivial(&inst("a", &[""], &[])).to_string(), "e");
        assert_eq!(
            trivial(&inst("a", &["11", "0000", "000"], &["", "1", "101"])).to_string(),
            "((1.1)+((0.(0.(0.0)))+(0.(0.0))))"
        );
        assert_eq!(trivial(&inst("a", &[], &["1"])), Regex::EmptySet);
    }

    #[test]
    fn pn_retrieval_identity_and_ties() {
        let a = inst("a", &["0", "00"], &["1"]);
        let b = inst("b", &["1"], &["0"]);
        let corpus = TrainCorpus::new(vec![
            Solved {
                instance: a.clone(),
                regex: re("(0*)-e"),
            },
            Solved {
                instance: b.clone(),
                regex: re("1"),
            },
        ])
        .unwrap();
        assert_eq!(pn_retrieval(&a, &corpus), Some(re("(0*)-e")));
        assert_eq!(pn_retrieval(&b, &corpus), Some(re("1")));

        // Two candidates overlap equally; the cheaper one (cost 7 vs 9) wins.
        let c1 = inst("c1", &["01"], &["10"]);
        let c2 = inst("c2", &["01"], &["11"]);
        let expensive = re("((0.1)+(1.(1.1)))");
        let cheap = re("(((0.1)*)-(1?))");
        assert_eq!(expensive.cost(&CostFunction::UNIFORM), 9);
        assert_eq!(cheap.cost(&CostFunction::UNIFORM), 7);
        let corpus = TrainCorpus::new(vec![
            Solved {
                instance: c1,
                regex: expensive,
            },
            Solved {
                instance: c2,
                regex: cheap.clone(),
            },
        ])
        .unwrap();
        let test = inst("t", &["01"], &["00"]);
        assert_eq!(pn_retrieval(&test, &corpus), Some(cheap));
    }

    #[test]
    fn re_retrieval_maximizes_pn_ratio() {
        let corpus = TrainCorpus::new(vec![Solved {
            instance: inst("a", &[""], &["1"]),
            regex: Regex::Epsilon,
        }])
        .unwrap();
        // The only candidate gets every string wrong and is still returned.
        let test = inst("t", &["0"], &[""]);
        assert_eq!(re_retrieval(&test, &corpus), Some(Regex::Epsilon));
        assert_eq!(test.pn.classify(&Regex::Epsilon), (0, 0));

        let corpus = TrainCorpus::new(vec![
            Solved {
                instance: inst("a", &[""], &["1"]),
                regex: Regex::Epsilon,
            },
            Solved {
                instance: inst("b", &["0"], &[""]),
                regex: re("0"),
            },
        ])
        .unwrap();
        assert_eq!(re_retrieval(&test, &corpus), Some(re("0")));
    }

    #[test]
    fn retrieval_skips_disallowed_operators() {
        let a = inst("a", &["0"], &["1"]);
        let corpus = TrainCorpus::new(vec![Solved {
            instance: a,
            regex: re("~1"),
        }])
        .unwrap();
        let mut test = inst("t", &["0"], &["1"]);
        test.ops = OperatorSet::REDUCED;
        assert_eq!(pn_retrieval(&test, &corpus), None);
        assert_eq!(re_retrieval(&test, &corpus), None);
    }

    #[test]
    fn corpus_rejects_imprecise_gold() {
        let a = inst("a", &["0"], &["1"]);
        assert_eq!(
            TrainCorpus::new(vec![Solved {
                instance: a,
                regex: re("1")
            }])
            .unwrap_err(),
            "a"
        );
    }
}
