//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero exit
//! status if any criterion failed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{naive_min_uniform_cost, trees_up_to, BitLangs};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rei_core::dataset::{encode_tokens, Record};
use rei_core::generator::{gen_dataset, sample_string, Recipe, Scheme};
use rei_core::matcher::{all_strings, bounded_language, matches};
use rei_core::regex::{Alphabet, CostFunction, Op, OperatorSet, Regex, Symbol};
use rei_core::solver::{Caps, Footprint, FootprintLayout, Search};
use rei_core::{parse, print, solve, Instance, PnSet};
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn costs(atom: u64, option: u64, star: u64, concat: u64, or: u64) -> CostFunction {
    CostFunction {
        atom,
        option,
        star,
        concat,
        or,
        ..CostFunction::UNIFORM
    }
}

/// Solves on one thread and checks the result against `bound`, then checks
/// that the reference regex is precise at exactly `bound`.
fn reference_vector(
    pos: &[&str],
    neg: &[&str],
    cf: CostFunction,
    ops: OperatorSet,
    reference: &str,
    bound: u64,
    limit: Duration,
) -> Result<String, String> {
    let inst = Instance::new(
        "vector",
        PnSet::new(pos.iter().copied(), neg.iter().copied()),
        cf,
        ops,
    );
    let start = Instant::now();
    let sol = solve(&inst, &Caps::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(sol.minimal, || {
        format!("search hit a cap, got {}", sol.regex)
    })?;
    check(inst.pn.is_precise(&sol.regex), || {
        format!("{} is not precise", sol.regex)
    })?;
    check(sol.regex.operators_used().is_subset(ops), || {
        format!("{} uses disallowed operators", sol.regex)
    })?;
    check(sol.regex.cost(&inst.cf) == sol.cost, || {
        "reported cost disagrees with cost()".into()
    })?;
    check(sol.cost <= bound, || {
        format!("cost {} exceeds {bound}", sol.cost)
    })?;
    check(elapsed <= limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })?;

    let known = parse(reference, &Alphabet::binary(), ops).map_err(|e| e.to_string())?;
    let precise = pos.iter().all(|w| matches(&known, w)) && neg.iter().all(|w| !matches(&known, w));
    check(precise, || format!("reference {reference} is not precise"))?;
    let known_cost = known.cost(&inst.cf);
    check(known_cost == bound, || {
        format!("reference regex costs {known_cost}, expected {bound}")
    })?;

    let note = if sol.cost < bound {
        " (cheaper than reference)"
    } else {
        ""
    };
    Ok(format!(
        "found {} at cost {}{note}; reference {reference} precise at cost {known_cost}; {:.2?}",
        sol.regex, sol.cost, elapsed
    ))
}

fn criterion_1() -> Outcome {
    let detail = reference_vector(
        &["0101"],
        &["1000100"],
        CostFunction::UNIFORM,
        OperatorSet::REDUCED,
        "((0.1)*)",
        4,
        Duration::from_secs(10),
    )?;
    check(!detail.contains("cheaper"), || {
        format!("cost must be exactly 4: {detail}")
    })?;
    Ok(detail)
}

fn criterion_2() -> Outcome {
    reference_vector(
        &["010011"],
        &["000000", "00011", "110010", "111010"],
        costs(20, 8, 3, 45, 38),
        OperatorSet::REDUCED,
        "(0.((1.(0*))*))",
        156,
        Duration::from_secs(300),
    )
}

fn criterion_3() -> Outcome {
    let limit = Duration::from_secs(600);
    let a = reference_vector(
        &["11", "0000", "000"],
        &["", "1", "101"],
        CostFunction::UNIFORM,
        OperatorSet::FULL,
        "((0*).(0+(1.1)))",
        8,
        limit,
    )
    .map_err(|e| format!("(a) {e}"))?;
    let b = reference_vector(
        &["0", "11", "011", "110", "10"],
        &["", "00", "000", "010", "1", "100", "101"],
        CostFunction::UNIFORM,
        OperatorSet::FULL,
        "(~((1?).(((0.(1?))*)-0)))",
        11,
        limit,
    )
    .map_err(|e| format!("(b) {e}"))?;
    let mut cf = costs(1, 36, 20, 38, 1);
    cf.complement = 10;
    cf.and = 12;
    cf.minus = 30;
    let c = reference_vector(
        &["011", "0", "1", "101"],
        &["", "10", "100", "11", "110"],
        cf,
        OperatorSet::FULL,
        "(0+((~1).1))",
        52,
        limit,
    )
    .map_err(|e| format!("(c) {e}"))?;
    Ok(format!("(a) {a} | (b) {b} | (c) {c}"))
}

fn criterion_4() -> Outcome {
    reference_vector(
        &["10", "000", "1101110", "1000000", "1110110", "010"],
        &["000110", "0110", "01101000"],
        CostFunction::UNIFORM,
        OperatorSet::REDUCED,
        "(((1.(0*))*).((0.(1?))*))",
        11,
        Duration::from_secs(600),
    )
}

fn criterion_5() -> Outcome {
    let sigma = Alphabet::binary();
    let strings = all_strings(&sigma, 4);
    let mut checked = Vec::new();
    let mut disagreements = 0usize;
    for ops in [OperatorSet::REDUCED, OperatorSet::FULL] {
        let mut n = 0usize;
        for level in trees_up_to(ops, &sigma, 7) {
            for r in &level {
                let lang = bounded_language(r, &sigma, 4).map_err(|e| e.to_string())?;
                disagreements += strings
                    .iter()
                    .filter(|w| matches(r, w) != lang.contains(*w))
                    .count();
                n += 1;
            }
        }
        checked.push(n);
    }
    check(disagreements == 0, || {
        format!("{disagreements} disagreements")
    })?;
    Ok(format!(
        "{} reduced and {} full regexes x {} strings, 0 disagreements",
        checked[0],
        checked[1],
        strings.len()
    ))
}

fn small_instances(ops: OperatorSet) -> Vec<Instance> {
    let mut recipe = Recipe::new(2024, 100);
    recipe.p_range = [1, 3];
    recipe.n_range = [1, 3];
    recipe.type1_le_range = [0, 3];
    recipe.type2_le_range = [0, 3];
    gen_dataset(&recipe)
        .expect("recipe is feasible")
        .into_iter()
        .map(|mut inst| {
            inst.ops = ops;
            inst.cf = CostFunction::UNIFORM.restricted(ops);
            inst
        })
        .collect()
}

/// Runs criterion 6 and collects the retained footprints for criterion 7.
fn criteria_6_and_7() -> (Outcome, Outcome) {
    let start = Instant::now();
    let langs = BitLangs::new(&Alphabet::binary(), 3);
    let mut sampled: Vec<(usize, Regex, Footprint)> = Vec::new();
    let mut layouts = Vec::new();
    let mut agree = 0;
    let mut failures = Vec::new();
    for ops in [OperatorSet::REDUCED, OperatorSet::FULL] {
        for inst in small_instances(ops) {
            let mut search = Search::new(&inst, Caps::default()).expect("valid instance");
            let sol = search.run();
            let naive = naive_min_uniform_cost(&langs, ops, &inst.pn.pos, &inst.pn.neg, 12);
            if sol.minimal && inst.pn.is_precise(&sol.regex) && Some(sol.cost as usize) == naive {
                agree += 1;
            } else {
                failures.push(format!("{} solver {} naive {naive:?}", inst.id, sol.cost));
            }
            let idx = layouts.len();
            sampled.extend(search.retained().map(|(_, r, fp)| (idx, r, fp)));
            layouts.push(FootprintLayout::new(&inst.pn.pos, &inst.pn.neg));
        }
    }
    let elapsed = start.elapsed();
    let six = if failures.is_empty() && elapsed <= Duration::from_secs(1800) {
        Ok(format!(
            "{agree}/200 instances (100 per operator set) agree; {elapsed:.2?}"
        ))
    } else {
        Err(format!(
            "{} disagreements, first {:?}; {elapsed:.2?}",
            failures.len(),
            failures.first()
        ))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let picks: Vec<_> = sampled.choose_multiple(&mut rng, 1000).collect();
    let mut bits = 0usize;
    let mut wrong = 0usize;
    for (idx, r, fp) in &picks {
        let layout = &layouts[*idx];
        for (s, w) in layout.strings().enumerate() {
            let w = std::str::from_utf8(w).unwrap();
            for i in 0..=w.len() {
                for j in i..=w.len() {
                    bits += 1;
                    if layout.get(fp.words(), s, i, j) != matches(r, &w[i..j]) {
                        wrong += 1;
                    }
                }
            }
        }
    }
    let seven = if picks.len() == 1000 && wrong == 0 {
        Ok(format!(
            "1000 sampled footprints, {bits} bits, all agree with matches()"
        ))
    } else {
        Err(format!(
            "{} sampled, {wrong} of {bits} bits wrong",
            picks.len()
        ))
    };
    (six, seven)
}

fn rei(dir: &Path, args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rei"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(out)
}

fn rei_ok(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = rei(dir, args)?;
    check(out.status.success(), || {
        format!(
            "rei {args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

fn json_file(path: &Path) -> Result<Value, String> {
    serde_json::from_str(&fs::read_to_string(path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())
}

/// 25 PN-sets with one uniform and 19 random cost functions each.
const CORPUS_RECIPE: &str = r#"
seed = 20240
pn_sets = 25
ops = "full"
costs = "random"
random_cost_functions = 19
p_range = [1, 5]
n_range = [1, 5]
type1_le_range = [0, 4]
type2_le_range = [0, 5]
"#;

fn build_corpus(dir: &Path) -> Result<(), String> {
    fs::write(dir.join("recipe.toml"), CORPUS_RECIPE).map_err(|e| e.to_string())?;
    rei_ok(
        dir,
        &["gen", "--recipe", "recipe.toml", "--out", "inst.jsonl"],
    )?;
    rei_ok(
        dir,
        &[
            "solve",
            "--in",
            "inst.jsonl",
            "--out",
            "gold.jsonl",
            "--workers",
            "4",
        ],
    )
}

fn criterion_8(dir: &Path) -> Outcome {
    rei_ok(
        dir,
        &[
            "baseline",
            "--kind",
            "trivial",
            "--in",
            "gold.jsonl",
            "--out",
            "trivial.tsv",
        ],
    )?;
    rei_ok(
        dir,
        &[
            "score",
            "--pred",
            "trivial.tsv",
            "--gold",
            "gold.jsonl",
            "--out",
            "trivial.json",
        ],
    )?;
    let s = json_file(&dir.join("trivial.json"))?;
    let n = s["instances"].as_u64().unwrap_or(0);
    check(n == 500, || format!("{n} instances, expected 500"))?;
    for key in ["compile_ratio", "precise_ratio", "pn_ratio"] {
        check(s[key]["num"] == s[key]["den"], || {
            format!("{key} = {}", s[key]["value"])
        })?;
    }
    let ratio = s["cost_ratio"]["value"].as_f64().unwrap_or(0.0);
    check(ratio > 1.0, || format!("cost ratio {ratio} not above 1"))?;
    Ok(format!(
        "500 instances: CR, Prec, PN all 100%, cost ratio {ratio:.3}"
    ))
}

fn criterion_9(dir: &Path) -> Outcome {
    rei_ok(
        dir,
        &[
            "split",
            "--in",
            "gold.jsonl",
            "--train",
            "train.jsonl",
            "--test",
            "test.jsonl",
            "--ratio",
            "0.2",
            "--seed",
            "3",
        ],
    )?;
    // The full gold file contains every test PN-set's own solution.
    rei_ok(
        dir,
        &[
            "baseline",
            "--kind",
            "re-retrieval",
            "--train",
            "gold.jsonl",
            "--in",
            "test.jsonl",
            "--out",
            "rr.tsv",
        ],
    )?;
    rei_ok(
        dir,
        &[
            "score",
            "--pred",
            "rr.tsv",
            "--gold",
            "test.jsonl",
            "--out",
            "rr.json",
        ],
    )?;
    let s = json_file(&dir.join("rr.json"))?;
    check(
        s["precise_ratio"]["num"] == s["precise_ratio"]["den"],
        || format!("precise ratio {}", s["precise_ratio"]["value"]),
    )?;
    Ok(format!(
        "{} test instances, re-retrieval precise ratio 100%, global minimal ratio {:.3}",
        s["instances"], s["minimal_ratio_global"]["value"]
    ))
}

fn random_regex(rng: &mut ChaCha8Rng, depth: usize) -> Regex {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..4) {
            0 => Regex::EmptySet,
            1 => Regex::Epsilon,
            k => Regex::Literal(Symbol(b'0' + k as u8 - 2)),
        };
    }
    if rng.random_bool(0.4) {
        let op = *Op::UNARY.choose(rng).unwrap();
        Regex::unary(op, random_regex(rng, depth - 1))
    } else {
        let op = *Op::BINARY.choose(rng).unwrap();
        Regex::binary(
            op,
            random_regex(rng, depth - 1),
            random_regex(rng, depth - 1),
        )
    }
}

fn criterion_10(dir: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let r = random_regex(&mut rng, 8);
        let text = print(&r);
        let back = parse(&text, &Alphabet::binary(), OperatorSet::FULL)
            .map_err(|e| format!("{text}: {e}"))?;
        check(back == r, || format!("round trip changed {text}"))?;
    }

    let sigma = Alphabet::binary();
    let cells = all_strings(&sigma, 3);
    let draws = 100_000;
    let mut counts = vec![0u64; cells.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..draws {
        let w = sample_string(Scheme::Type1, &sigma, 3, &mut rng);
        counts[cells.iter().position(|c| *c == w).unwrap()] += 1;
    }
    let expected = draws as f64 / cells.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((cells.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 1e-3);
    check(stat < critical, || {
        format!("chi-square {stat:.2} exceeds {critical:.2}")
    })?;

    let read = |name: &str| fs::read(dir.join(name)).map_err(|e| e.to_string());
    rei_ok(
        dir,
        &["gen", "--recipe", "recipe.toml", "--out", "inst2.jsonl"],
    )?;
    check(read("inst.jsonl")? == read("inst2.jsonl")?, || {
        "gen output differs between runs".into()
    })?;
    rei_ok(
        dir,
        &[
            "solve",
            "--in",
            "inst.jsonl",
            "--out",
            "seq.jsonl",
            "--workers",
            "1",
        ],
    )?;
    rei_ok(
        dir,
        &[
            "solve",
            "--in",
            "inst.jsonl",
            "--out",
            "seq2.jsonl",
            "--workers",
            "1",
        ],
    )?;
    check(read("seq.jsonl")? == read("seq2.jsonl")?, || {
        "solve output differs between runs".into()
    })?;
    check(read("seq.jsonl")? == read("gold.jsonl")?, || {
        "4-worker solve differs from sequential".into()
    })?;
    rei_ok(
        dir,
        &[
            "score",
            "--pred",
            "trivial.tsv",
            "--gold",
            "gold.jsonl",
            "--out",
            "trivial2.json",
        ],
    )?;
    check(read("trivial.json")? == read("trivial2.json")?, || {
        "score output differs between runs".into()
    })?;
    Ok(format!(
        "10000 ASTs round-trip; type-1 chi-square {stat:.2} < {critical:.2}; gen/solve/score byte-identical; 4 workers = 1 worker"
    ))
}

fn criterion_11() -> Outcome {
    let inst = Instance::new(
        "worked",
        PnSet::new(["11", "0000", "000"], ["", "1", "101"]),
        CostFunction::UNIFORM,
        OperatorSet::REDUCED,
    );
    let regex = parse(
        "((0*).(0+(1.1)))",
        &Alphabet::binary(),
        OperatorSet::REDUCED,
    )
    .map_err(|e| e.to_string())?;
    let tokens = encode_tokens(&Record::solved(inst, regex, true)).join(" ");
    let expected = "[CLS] [POS] ONE ONE [POS] ZERO ZERO ZERO ZERO [POS] ZERO ZERO ZERO [NEG] e [NEG] ONE \
                    [NEG] ONE ZERO ONE [COST_A] 1 [COST_?] 1 [COST_*] 1 [COST_.] 1 [COST_+] 1 [BOR] \
                    ( ZERO * ) . ( ZERO + ( ONE . ONE ) ) [EOR]";
    check(tokens == expected, || format!("got {tokens}"))?;
    Ok(format!("{} tokens identical", tokens.split(' ').count()))
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let dir = TempDir::new().expect("temporary directory");
    let corpus = build_corpus(dir.path());
    let with_corpus = |f: fn(&Path) -> Outcome| -> Outcome {
        corpus.clone().map_err(|e| format!("corpus: {e}"))?;
        guarded(|| f(dir.path()))
    };
    let (six, seven) =
        guarded(|| Ok(criteria_6_and_7())).unwrap_or_else(|e| (Err(e.clone()), Err(e)));

    let results: Vec<(&str, Outcome)> = vec![
        (
            "reference instance, reduced uniform, cost 4",
            guarded(criterion_1),
        ),
        (
            "reference instance, reduced weighted, cost 156",
            guarded(criterion_2),
        ),
        (
            "reference instances, full operators, costs 8/11/52",
            guarded(criterion_3),
        ),
        (
            "reference instance, reduced multi-string, cost 11",
            guarded(criterion_4),
        ),
        (
            "matcher agrees with set semantics, cost <= 7",
            guarded(criterion_5),
        ),
        ("solver cost equals naive enumeration", six),
        ("retained footprints are sound", seven),
        (
            "trivial baseline scoring structure",
            with_corpus(criterion_8),
        ),
        (
            "re-retrieval precision with gold in corpus",
            with_corpus(criterion_9),
        ),
        ("round-trip and determinism", with_corpus(criterion_10)),
        ("worked example token encoding", guarded(criterion_11)),
    ];

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
