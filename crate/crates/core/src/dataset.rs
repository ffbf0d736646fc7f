//! Instance files, prediction files, the token encoding and the train/test split.
//!
//! Instance files hold one JSON object per line:
//!
//! ```text
//! {"id":"x","alphabet":"01","pos":["11"],"neg":[""],"ops":"reduced",
//!  "costs":{"A":1,"?":1,"*":1,".":1,"+":1},
//!  "solution":{"regex":"(1*)","cost":2,"minimal":true}}
//! ```
//!
//! Cost keys are `A` (atoms), `?`, `*`, `.`, `+`, `~`, `&` and `-`. Keys for
//! operators outside `ops` may be omitted and then read as [`DISABLED_COST`].

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Instance, PnSet};
use crate::regex::{Alphabet, CostFunction, Op, OperatorSet, Regex, DISABLED_COST};
use crate::syntax::parse;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: corrupt record: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("token sequence: {0}")]
    Tokens(String),
    #[error("split: {0}")]
    Split(String),
}

/// A reference solution stored with an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gold {
    pub regex: Regex,
    pub cost: u64,
    pub minimal: bool,
}

/// An instance with its optional reference solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub instance: Instance,
    pub solution: Option<Gold>,
}

impl Record {
    pub fn new(instance: Instance) -> Self {
        Record {
            instance,
            solution: None,
        }
    }

    pub fn solved(instance: Instance, regex: Regex, minimal: bool) -> Self {
        let cost = instance.cost(&regex);
        Record {
            instance,
            solution: Some(Gold {
                regex,
                cost,
                minimal,
            }),
        }
    }

    pub fn id(&self) -> &str {
        &self.instance.id
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCosts {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    atom: Option<u64>,
    #[serde(rename = "?", default, skip_serializing_if = "Option::is_none")]
    option: Option<u64>,
    #[serde(rename = "*", default, skip_serializing_if = "Option::is_none")]
    star: Option<u64>,
    #[serde(rename = ".", default, skip_serializing_if = "Option::is_none")]
    concat: Option<u64>,
    #[serde(rename = "+", default, skip_serializing_if = "Option::is_none")]
    or: Option<u64>,
    #[serde(rename = "~", default, skip_serializing_if = "Option::is_none")]
    complement: Option<u64>,
    #[serde(rename = "&", default, skip_serializing_if = "Option::is_none")]
    and: Option<u64>,
    #[serde(rename = "-", default, skip_serializing_if = "Option::is_none")]
    minus: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSolution {
    regex: String,
    cost: u64,
    #[serde(default = "yes")]
    minimal: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    id: String,
    alphabet: String,
    pos: Vec<String>,
    neg: Vec<String>,
    ops: String,
    costs: WireCosts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solution: Option<WireSolution>,
}

/// Cost-token order, which is also the order of cost keys on disk.
pub const COST_ORDER: [(Op, &str); 8] = [
    (Op::Literal, "A"),
    (Op::Option, "?"),
    (Op::Star, "*"),
    (Op::Concat, "."),
    (Op::Or, "+"),
    (Op::Complement, "~"),
    (Op::And, "&"),
    (Op::Minus, "-"),
];

fn cost_slot(costs: &mut WireCosts, op: Op) -> &mut Option<u64> {
    match op {
        Op::EmptySet | Op::Epsilon | Op::Literal => &mut costs.atom,
        Op::Option => &mut costs.option,
        Op::Star => &mut costs.star,
        Op::Concat => &mut costs.concat,
        Op::Or => &mut costs.or,
        Op::Complement => &mut costs.complement,
        Op::And => &mut costs.and,
        Op::Minus => &mut costs.minus,
    }
}

/// Name of a record-level operator set.
fn ops_name(ops: OperatorSet) -> Option<&'static str> {
    match ops {
        OperatorSet::REDUCED => Some("reduced"),
        OperatorSet::FULL => Some("full"),
        _ => None,
    }
}

fn to_wire(rec: &Record) -> Result<WireRecord, String> {
    let inst = &rec.instance;
    let ops = ops_name(inst.ops)
        .ok_or_else(|| format!("{}: operator set must be reduced or full", inst.id))?;
    let mut costs = WireCosts::default();
    for (op, _) in COST_ORDER {
        if inst.ops.contains(op) {
            *cost_slot(&mut costs, op) = Some(inst.cf.of(op));
        }
    }
    Ok(WireRecord {
        id: inst.id.clone(),
        alphabet: inst.alphabet.to_string(),
        pos: inst.pn.pos.clone(),
        neg: inst.pn.neg.clone(),
        ops: ops.to_string(),
        costs,
        solution: rec.solution.as_ref().map(|g| WireSolution {
            regex: g.regex.to_string(),
            cost: g.cost,
            minimal: g.minimal,
        }),
    })
}

fn from_wire(mut w: WireRecord) -> Result<Record, String> {
    let alphabet = Alphabet::new(&w.alphabet).map_err(|e| e.to_string())?;
    let ops = match w.ops.as_str() {
        "reduced" => OperatorSet::REDUCED,
        "full" => OperatorSet::FULL,
        other => return Err(format!("unknown operator set {other:?}")),
    };
    let mut cf = CostFunction::UNIFORM;
    for (op, key) in COST_ORDER {
        match cost_slot(&mut w.costs, op).take() {
            Some(v) => cf.set(op, v),
            None if ops.contains(op) => return Err(format!("missing cost {key:?}")),
            None => cf.set(op, DISABLED_COST),
        }
    }
    let instance = Instance {
        id: w.id,
        alphabet,
        pn: PnSet {
            pos: w.pos,
            neg: w.neg,
        },
        cf: cf.restricted(ops),
        ops,
    };
    instance.validate().map_err(|e| e.to_string())?;
    let solution = match w.solution {
        None => None,
        Some(s) => Some(check_gold(&instance, &s.regex, s.cost, s.minimal)?),
    };
    Ok(Record { instance, solution })
}

fn check_gold(inst: &Instance, text: &str, cost: u64, minimal: bool) -> Result<Gold, String> {
    let regex =
        parse(text, &inst.alphabet, inst.ops).map_err(|e| format!("solution {text:?}: {e}"))?;
    if !inst.pn.is_precise(&regex) {
        return Err(format!("solution {text:?} is not precise"));
    }
    let actual = inst.cost(&regex);
    if actual != cost {
        return Err(format!(
            "solution {text:?} costs {actual}, file says {cost}"
        ));
    }
    Ok(Gold {
        regex,
        cost,
        minimal,
    })
}

/// One record as a JSON line, without the newline.
pub fn record_to_line(rec: &Record) -> Result<String, DatasetError> {
    let wire = to_wire(rec).map_err(|msg| DatasetError::Corrupt { line: 0, msg })?;
    Ok(serde_json::to_string(&wire).expect("records serialize"))
}

/// Parses and validates one JSON line; `line` is used in errors.
pub fn record_from_line(text: &str, line: usize) -> Result<Record, DatasetError> {
    let wire: WireRecord = serde_json::from_str(text).map_err(|e| DatasetError::Parse {
        line,
        msg: e.to_string(),
    })?;
    from_wire(wire).map_err(|msg| DatasetError::Corrupt { line, msg })
}

pub fn write_records<W: Write>(out: W, records: &[Record]) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(out);
    for rec in records {
        writeln!(out, "{}", record_to_line(rec)?)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads records, skipping blank lines. Ids must be unique.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<Record>, DatasetError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = record_from_line(&line, i + 1)?;
        if !ids.insert(rec.instance.id.clone()) {
            return Err(DatasetError::DuplicateId {
                line: i + 1,
                id: rec.instance.id,
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// A line that could not be turned into a record.
#[derive(Debug)]
pub struct BadRecord {
    pub line: usize,
    /// The record's id when the line is JSON with a string `id` field.
    pub id: Option<String>,
    pub error: DatasetError,
}

/// Like [`read_records`] but reports bad lines individually instead of
/// stopping at the first one. Only I/O failures abort.
pub fn read_records_lenient<R: BufRead>(input: R) -> io::Result<Vec<Result<Record, BadRecord>>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = match record_from_line(&line, i + 1) {
            Ok(rec) if !ids.insert(rec.instance.id.clone()) => Err(BadRecord {
                line: i + 1,
                id: Some(rec.instance.id.clone()),
                error: DatasetError::DuplicateId {
                    line: i + 1,
                    id: rec.instance.id,
                },
            }),
            Ok(rec) => Ok(rec),
            Err(error) => Err(BadRecord {
                line: i + 1,
                id: serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id")?.as_str().map(String::from)),
                error,
            }),
        };
        out.push(item);
    }
    Ok(out)
}

pub fn write_instances(path: impl AsRef<Path>, records: &[Record]) -> Result<(), DatasetError> {
    write_records(File::create(path)?, records)
}

pub fn read_instances(path: impl AsRef<Path>) -> Result<Vec<Record>, DatasetError> {
    read_records(BufReader::new(File::open(path)?))
}

/// A submitted answer: the raw text is kept because it may not parse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub id: String,
    pub text: String,
}

impl Prediction {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Prediction {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Reads `id TAB regex` lines. Blank lines are skipped; a line without a tab,
/// an empty id or a repeated id is an error.
pub fn read_predictions<R: BufRead>(input: R) -> Result<Vec<Prediction>, DatasetError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, text)) = line.split_once('\t') else {
            return Err(DatasetError::Parse {
                line: i + 1,
                msg: "expected `id<TAB>regex`".into(),
            });
        };
        if id.is_empty() {
            return Err(DatasetError::Parse {
                line: i + 1,
                msg: "empty id".into(),
            });
        }
        if !ids.insert(id.to_string()) {
            return Err(DatasetError::DuplicateId {
                line: i + 1,
                id: id.to_string(),
            });
        }
        out.push(Prediction::new(id, text));
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(out: W, preds: &[Prediction]) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(out);
    for p in preds {
        if p.id.contains(['\t', '\n']) || p.text.contains(['\t', '\n']) {
            return Err(DatasetError::Parse {
                line: 0,
                msg: format!("prediction {:?} contains a tab or newline", p.id),
            });
        }
        writeln!(out, "{}\t{}", p.id, p.text)?;
    }
    out.flush()?;
    Ok(())
}

pub const CLS: &str = "[CLS]";
pub const POS: &str = "[POS]";
pub const NEG: &str = "[NEG]";
pub const BOR: &str = "[BOR]";
pub const EOR: &str = "[EOR]";

fn symbol_token(b: u8) -> String {
    match b {
        b'0' => "ZERO".into(),
        b'1' => "ONE".into(),
        b => (b as char).to_string(),
    }
}

fn token_symbol(t: &str) -> Option<char> {
    match t {
        "ZERO" => Some('0'),
        "ONE" => Some('1'),
        _ => {
            let mut chars = t.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        }
    }
}

fn cost_token(key: &str) -> String {
    format!("[COST_{key}]")
}

/// The model input encoding of a record. Binary symbols in strings and
/// regexes become `ZERO`/`ONE`, cost values are spelled with digit tokens,
/// and the regex is written in canonical form without its outermost
/// parentheses. Records without a solution end at `[BOR]`.
pub fn encode_tokens(rec: &Record) -> Vec<String> {
    let inst = &rec.instance;
    let mut out = vec![CLS.to_string()];
    for (tag, words) in [(POS, &inst.pn.pos), (NEG, &inst.pn.neg)] {
        for w in words {
            out.push(tag.to_string());
            if w.is_empty() {
                out.push("e".into());
            }
            out.extend(w.bytes().map(symbol_token));
        }
    }
    for (op, key) in COST_ORDER {
        if inst.ops.contains(op) {
            out.push(cost_token(key));
            out.extend(inst.cf.of(op).to_string().chars().map(String::from));
        }
    }
    out.push(BOR.to_string());
    if let Some(g) = &rec.solution {
        let text = g.regex.to_string();
        let inner = if g.regex.op().is_leaf() {
            &text[..]
        } else {
            &text[1..text.len() - 1]
        };
        out.extend(inner.bytes().map(symbol_token));
        out.push(EOR.to_string());
    }
    out
}

/// Inverts [`encode_tokens`]. The operator set is inferred from the cost
/// tokens present; a decoded solution is marked minimal.
pub fn decode_tokens<S: AsRef<str>>(
    tokens: &[S],
    id: &str,
    alphabet: &Alphabet,
) -> Result<Record, DatasetError> {
    let err = |m: String| DatasetError::Tokens(m);
    let toks: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    if toks.first() != Some(&CLS) {
        return Err(err("missing [CLS]".into()));
    }
    let mut i = 1;
    let mut pn = PnSet::default();
    while i < toks.len() && (toks[i] == POS || toks[i] == NEG) {
        let positive = toks[i] == POS;
        i += 1;
        let mut word = String::new();
        if toks.get(i) == Some(&"e") {
            i += 1;
        } else {
            while i < toks.len() && !toks[i].starts_with('[') {
                let c = token_symbol(toks[i])
                    .ok_or_else(|| err(format!("bad symbol token {:?}", toks[i])))?;
                word.push(c);
                i += 1;
            }
            if word.is_empty() {
                return Err(err("empty string must be written as e".into()));
            }
        }
        if positive {
            pn.pos.push(word);
        } else {
            pn.neg.push(word);
        }
    }
    let mut costs: HashMap<&str, u64> = HashMap::new();
    while i < toks.len() && toks[i].starts_with("[COST_") {
        let key = toks[i]
            .strip_prefix("[COST_")
            .and_then(|k| k.strip_suffix(']'))
            .filter(|k| COST_ORDER.iter().any(|(_, c)| c == k))
            .ok_or_else(|| err(format!("unknown cost token {:?}", toks[i])))?;
        i += 1;
        let mut digits = String::new();
        while i < toks.len() && toks[i].len() == 1 && toks[i].as_bytes()[0].is_ascii_digit() {
            digits.push_str(toks[i]);
            i += 1;
        }
        let value = digits
            .parse()
            .map_err(|_| err(format!("cost {key} has no digits")))?;
        if costs.insert(key, value).is_some() {
            return Err(err(format!("cost {key} given twice")));
        }
    }
    if toks.get(i) != Some(&BOR) {
        return Err(err(format!("expected [BOR] at token {i}")));
    }
    i += 1;
    let ops = if ["~", "&", "-"].iter().any(|k| costs.contains_key(k)) {
        OperatorSet::FULL
    } else {
        OperatorSet::REDUCED
    };
    let mut cf = CostFunction::UNIFORM;
    for (op, key) in COST_ORDER {
        match costs.get(key) {
            Some(&v) => cf.set(op, v),
            None if ops.contains(op) => return Err(err(format!("missing cost {key}"))),
            None => cf.set(op, DISABLED_COST),
        }
    }
    let instance = Instance {
        id: id.to_string(),
        alphabet: alphabet.clone(),
        pn,
        cf: cf.restricted(ops),
        ops,
    };
    instance.validate().map_err(|e| err(e.to_string()))?;
    let rest = &toks[i..];
    let solution = match rest.split_last() {
        None => None,
        Some((&last, body)) if last == EOR => {
            let mut text = String::new();
            for t in body {
                text.push(token_symbol(t).ok_or_else(|| err(format!("bad regex token {t:?}")))?);
            }
            let regex =
                parse(&text, alphabet, ops).map_err(|e| err(format!("regex {text:?}: {e}")))?;
            let cost = instance.cost(&regex);
            Some(check_gold(&instance, &regex.to_string(), cost, true).map_err(err)?)
        }
        Some(_) => return Err(err("regex is not terminated by [EOR]".into())),
    };
    Ok(Record { instance, solution })
}

/// Splits solved records into train and test. Records sharing a PN-set stay
/// together, and no canonical solution appears on both sides. Groups linked by
/// a shared solution are shuffled with `seed` and added to the test side while
/// they fit in `round(ratio * n)` records.
pub fn split_train_test(
    records: Vec<Record>,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<Record>, Vec<Record>), DatasetError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(DatasetError::Split(format!("ratio {ratio} outside [0, 1]")));
    }
    let mut solutions = Vec::with_capacity(records.len());
    for r in &records {
        let g = r
            .solution
            .as_ref()
            .ok_or_else(|| DatasetError::Split(format!("{} has no solution", r.id())))?;
        solutions.push(g.regex.to_string());
    }
    let n = records.len();
    let target = (ratio * n as f64).round() as usize;

    let mut pn_group: HashMap<(String, &[String], &[String]), usize> = HashMap::new();
    let mut group_of = Vec::with_capacity(n);
    for r in &records {
        let key = (
            r.instance.alphabet.to_string(),
            &r.instance.pn.pos[..],
            &r.instance.pn.neg[..],
        );
        let next = pn_group.len();
        group_of.push(*pn_group.entry(key).or_insert(next));
    }
    let groups = pn_group.len();
    let mut parent: Vec<usize> = (0..groups).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut by_solution: HashMap<&str, usize> = HashMap::new();
    for (i, s) in solutions.iter().enumerate() {
        let g = group_of[i];
        if let Some(&other) = by_solution.get(s.as_str()) {
            let (a, b) = (find(&mut parent, g), find(&mut parent, other));
            parent[a.max(b)] = a.min(b);
        } else {
            by_solution.insert(s, g);
        }
    }

    let mut size = vec![0usize; groups];
    let mut roots = Vec::new();
    for &g in &group_of {
        let root = find(&mut parent, g);
        if size[root] == 0 {
            roots.push(root);
        }
        size[root] += 1;
    }
    roots.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_test = vec![false; groups];
    let mut taken = 0;
    for root in roots {
        if taken + size[root] <= target {
            in_test[root] = true;
            taken += size[root];
        }
    }
    if target > 0 && taken == 0 {
        return Err(DatasetError::Split(format!(
            "no group of records with disjoint solutions fits in a test set of {target}"
        )));
    }
    let mut train = Vec::with_capacity(n - taken);
    let mut test = Vec::with_capacity(taken);
    for (i, r) in records.into_iter().enumerate() {
        if in_test[find(&mut parent, group_of[i])] {
            test.push(r);
        } else {
            train.push(r);
        }
    }
    Ok((train, test))
}
