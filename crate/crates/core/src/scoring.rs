//! Challenge metrics for a set of predictions against solved instances.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::dataset::{Prediction, Record};
use crate::syntax::parse;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("duplicate prediction for {0:?}")]
    DuplicatePrediction(String),
    #[error("prediction for unknown instance {0:?}")]
    UnknownId(String),
    #[error("instance {0:?} has no reference solution")]
    MissingGold(String),
}

/// An exact ratio. A zero denominator reads as zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        Fraction { num, den }
    }

    pub fn rational(self) -> BigRational {
        if self.den == 0 {
            BigRational::zero()
        } else {
            BigRational::new(self.num.into(), self.den.into())
        }
    }

    pub fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    fn json(self) -> Value {
        json!({"num": self.num, "den": self.den, "value": round6(self.value())})
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn rational_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational_json(r: &BigRational) -> Value {
    json!({"num": r.numer().to_string(), "den": r.denom().to_string(), "value": round6(rational_f64(r))})
}

/// Outcome for one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceScore {
    pub id: String,
    /// Parses under the instance's alphabet and operator set.
    pub valid: bool,
    pub pos_ok: usize,
    pub pos_total: usize,
    pub neg_ok: usize,
    pub neg_total: usize,
    pub precise: bool,
    pub minimal: bool,
    pub cost: Option<u64>,
    pub gold_cost: u64,
}

/// Scores one prediction. A missing or invalid prediction gets every string wrong.
pub fn score_instance(rec: &Record, pred: Option<&str>) -> Result<InstanceScore, ScoreError> {
    let inst = &rec.instance;
    let gold = rec
        .solution
        .as_ref()
        .ok_or_else(|| ScoreError::MissingGold(inst.id.clone()))?;
    let regex = pred.and_then(|t| parse(t, &inst.alphabet, inst.ops).ok());
    let (pos_ok, neg_ok) = match &regex {
        Some(r) => inst.pn.classify(r),
        None => (0, 0),
    };
    let precise = regex.is_some() && pos_ok == inst.pn.pos.len() && neg_ok == inst.pn.neg.len();
    let cost = regex.as_ref().map(|r| inst.cost(r));
    Ok(InstanceScore {
        id: inst.id.clone(),
        valid: regex.is_some(),
        pos_ok,
        pos_total: inst.pn.pos.len(),
        neg_ok,
        neg_total: inst.pn.neg.len(),
        precise,
        minimal: precise && cost.is_some_and(|c| c <= gold.cost),
        cost,
        gold_cost: gold.cost,
    })
}

/// The ten challenge metrics, plus per-instance means of the string ratios.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreReport {
    pub instances: u64,
    pub compile_ratio: Fraction,
    pub precise_absolute: u64,
    pub precise_ratio: Fraction,
    /// Over all positive strings of all instances.
    pub positive_ratio: Fraction,
    pub negative_ratio: Fraction,
    pub pn_ratio: Fraction,
    pub minimal_instances: u64,
    pub minimal_ratio_precise: Fraction,
    pub minimal_ratio_global: Fraction,
    /// Mean of `cost / gold cost` over precise predictions; absent when none are precise.
    pub cost_ratio: Option<BigRational>,
    /// Mean over instances with at least one positive string.
    pub macro_positive_ratio: Option<BigRational>,
    pub macro_negative_ratio: Option<BigRational>,
    pub macro_pn_ratio: Option<BigRational>,
}

fn mean(values: Vec<BigRational>) -> Option<BigRational> {
    if values.is_empty() {
        return None;
    }
    let n = BigInt::from(values.len());
    let sum = values.into_iter().fold(BigRational::zero(), |a, b| a + b);
    Some(sum / BigRational::from_integer(n))
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(num.into(), den.into())
}

impl ScoreReport {
    pub fn from_scores(scores: &[InstanceScore]) -> Self {
        let total = scores.len() as u64;
        let sum = |f: &dyn Fn(&InstanceScore) -> usize| scores.iter().map(f).sum::<usize>() as u64;
        let valid = sum(&|s| s.valid as usize);
        let precise = sum(&|s| s.precise as usize);
        let minimal = sum(&|s| s.minimal as usize);
        let pos_ok = sum(&|s| s.pos_ok);
        let pos_total = sum(&|s| s.pos_total);
        let neg_ok = sum(&|s| s.neg_ok);
        let neg_total = sum(&|s| s.neg_total);
        let cost_ratio = mean(
            scores
                .iter()
                .filter(|s| s.precise)
                .map(|s| ratio(s.cost.unwrap() as usize, s.gold_cost as usize))
                .collect(),
        );
        let macro_of = |ok: fn(&InstanceScore) -> (usize, usize)| {
            mean(
                scores
                    .iter()
                    .map(ok)
                    .filter(|&(_, d)| d > 0)
                    .map(|(n, d)| ratio(n, d))
                    .collect(),
            )
        };
        ScoreReport {
            instances: total,
            compile_ratio: Fraction::new(valid, total),
            precise_absolute: precise,
            precise_ratio: Fraction::new(precise, total),
            positive_ratio: Fraction::new(pos_ok, pos_total),
            negative_ratio: Fraction::new(neg_ok, neg_total),
            pn_ratio: Fraction::new(pos_ok + neg_ok, pos_total + neg_total),
            minimal_instances: minimal,
            minimal_ratio_precise: Fraction::new(minimal, precise),
            minimal_ratio_global: Fraction::new(minimal, total),
            cost_ratio,
            macro_positive_ratio: macro_of(|s| (s.pos_ok, s.pos_total)),
            macro_negative_ratio: macro_of(|s| (s.neg_ok, s.neg_total)),
            macro_pn_ratio: macro_of(|s| (s.pos_ok + s.neg_ok, s.pos_total + s.neg_total)),
        }
    }

    pub fn to_json(&self) -> Value {
        let opt = |r: &Option<BigRational>| r.as_ref().map_or(Value::Null, rational_json);
        json!({
            "instances": self.instances,
            "compile_ratio": self.compile_ratio.json(),
            "precise_absolute": self.precise_absolute,
            "precise_ratio": self.precise_ratio.json(),
            "positive_ratio": self.positive_ratio.json(),
            "negative_ratio": self.negative_ratio.json(),
            "pn_ratio": self.pn_ratio.json(),
            "minimal_instances": self.minimal_instances,
            "minimal_ratio_precise": self.minimal_ratio_precise.json(),
            "minimal_ratio_global": self.minimal_ratio_global.json(),
            "cost_ratio": opt(&self.cost_ratio),
            "macro_positive_ratio": opt(&self.macro_positive_ratio),
            "macro_negative_ratio": opt(&self.macro_negative_ratio),
            "macro_pn_ratio": opt(&self.macro_pn_ratio),
        })
    }

    /// Header and one row, percentages with two decimals.
    pub fn table(&self) -> String {
        let pct = |f: Fraction| format!("{:.2}", 100.0 * f.value());
        let cells = [
            ("CR", pct(self.compile_ratio)),
            ("Prec", self.precise_absolute.to_string()),
            ("Prec%", pct(self.precise_ratio)),
            ("P%", pct(self.positive_ratio)),
            ("N%", pct(self.negative_ratio)),
            ("PN%", pct(self.pn_ratio)),
            ("Min", self.minimal_instances.to_string()),
            ("Min%P", pct(self.minimal_ratio_precise)),
            ("Min%G", pct(self.minimal_ratio_global)),
            (
                "CostRatio",
                self.cost_ratio
                    .as_ref()
                    .map_or("-".into(), |r| format!("{:.2}", rational_f64(r))),
            ),
        ];
        let mut head = String::new();
        let mut row = String::new();
        for (i, (name, value)) in cells.iter().enumerate() {
            let w = name.len().max(value.len());
            let sep = if i == 0 { "" } else { "  " };
            let _ = write!(head, "{sep}{name:>w$}");
            let _ = write!(row, "{sep}{value:>w$}");
        }
        format!("{head}\n{row}\n")
    }
}

/// Scores `preds` against every record of `gold`, in gold order. Gold
/// records without a prediction count as invalid.
pub fn score(preds: &[Prediction], gold: &[Record]) -> Result<ScoreReport, ScoreError> {
    Ok(ScoreReport::from_scores(&score_all(preds, gold)?))
}

pub fn score_all(preds: &[Prediction], gold: &[Record]) -> Result<Vec<InstanceScore>, ScoreError> {
    let mut by_id: HashMap<&str, &str> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(&p.id, &p.text).is_some() {
            return Err(ScoreError::DuplicatePrediction(p.id.clone()));
        }
    }
    let known: std::collections::HashSet<&str> = gold.iter().map(|r| r.id()).collect();
    if let Some(p) = preds.iter().find(|p| !known.contains(p.id.as_str())) {
        return Err(ScoreError::UnknownId(p.id.clone()));
    }
    gold.par_iter()
        .map(|rec| score_instance(rec, by_id.get(rec.id()).copied()))
        .collect()
}

/// The ranking value: the global minimal ratio.
pub fn leaderboard_key(r: &ScoreReport) -> BigRational {
    r.minimal_ratio_global.rational()
}
