//! `rei`: generate, solve, baseline, score and encode regex inference instances.
//!
//! Exit status: 0 on success, 2 for usage errors, 3 for data errors and 4
//! when a resource cap left some solution unproven.

mod manifest;

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rei_core::baselines::{pn_retrieval, re_retrieval, trivial, Solved, TrainCorpus};
use rei_core::dataset::{
    decode_tokens, encode_tokens, read_instances, read_predictions, read_records_lenient,
    record_to_line, split_train_test, write_instances, write_predictions, DatasetError, Prediction,
    Record,
};
use rei_core::generator::{gen_dataset, CostMode, OpsMode, Recipe};
use rei_core::scoring::{leaderboard_key, score};
use rei_core::solver::{solve, Caps};
use rei_core::Alphabet;

use manifest::RunRecord;

#[derive(Parser)]
#[command(name = "rei", version, about = "Regular expression inference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve every instance of a file exactly.
    Solve(SolveArgs),
    /// Predict with a heuristic baseline.
    Baseline(BaselineArgs),
    /// Score predictions against solved instances.
    Score(ScoreArgs),
    /// Write the token encoding of each instance, one per line.
    Encode(EncodeArgs),
    /// Rebuild instances from token lines.
    Decode(DecodeArgs),
    /// Split solved instances into train and test files.
    Split(SplitArgs),
    /// Re-run the command recorded in a manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OpsArg {
    Reduced,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostsArg {
    Uniform,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Trivial,
    PnRetrieval,
    ReRetrieval,
}

#[derive(Args)]
struct GenArgs {
    /// TOML recipe; flags given alongside it override its fields.
    #[arg(long, env = "REI_RECIPE")]
    recipe: Option<PathBuf>,
    #[arg(long, env = "REI_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    pn_sets: Option<usize>,
    #[arg(long, value_enum, env = "REI_OPS")]
    ops: Option<OpsArg>,
    #[arg(long, value_enum, env = "REI_COSTS")]
    costs: Option<CostsArg>,
    #[arg(long)]
    prefix: Option<String>,
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in", env = "REI_IN")]
    input: PathBuf,
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
    /// Stop after this many distinct footprints per instance.
    #[arg(long, env = "REI_CAPS_FOOTPRINTS", default_value_t = Caps::default().max_footprints)]
    caps_footprints: usize,
    /// Wall-clock budget per instance.
    #[arg(long, env = "REI_CAPS_SECONDS")]
    caps_seconds: Option<f64>,
    #[arg(long, env = "REI_WORKERS", default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    kind: BaselineKind,
    /// Solved training instances, required by the retrieval baselines.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long = "in", env = "REI_IN")]
    input: PathBuf,
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Prediction file with `id<TAB>regex` lines.
    #[arg(long)]
    pred: PathBuf,
    /// Solved instances.
    #[arg(long)]
    gold: PathBuf,
    /// JSON report.
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long = "in", env = "REI_IN")]
    input: PathBuf,
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
    /// Prefix each line with the instance id and a tab.
    #[arg(long)]
    with_ids: bool,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long = "in", env = "REI_IN")]
    input: PathBuf,
    #[arg(long, env = "REI_OUT")]
    out: PathBuf,
    #[arg(long, default_value = "01")]
    alphabet: String,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in", env = "REI_IN")]
    input: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    #[arg(long, env = "REI_SEED")]
    seed: u64,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// What a successful run produced, for the manifest and the exit status.
struct Outcome {
    subcommand: &'static str,
    args: Vec<String>,
    params: Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    data_errors: usize,
    degraded: usize,
}

fn path_arg(flag: &str, p: &Path) -> [String; 2] {
    [flag.to_string(), p.display().to_string()]
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let mut recipe = match &a.recipe {
        Some(path) => Recipe::from_toml(&fs::read_to_string(path)?)
            .map_err(|e| Failure::Data(e.to_string()))?,
        None => {
            let seed = a
                .seed
                .ok_or_else(|| Failure::Usage("gen needs --seed or --recipe".into()))?;
            Recipe::new(seed, 10)
        }
    };
    if let Some(seed) = a.seed {
        recipe.seed = seed;
    }
    if let Some(n) = a.pn_sets {
        recipe.pn_sets = n;
    }
    if let Some(ops) = a.ops {
        recipe.ops = match ops {
            OpsArg::Reduced => OpsMode::Reduced,
            OpsArg::Full => OpsMode::Full,
        };
    }
    if let Some(costs) = a.costs {
        recipe.costs = match costs {
            CostsArg::Uniform => CostMode::Uniform,
            CostsArg::Random => CostMode::Random,
        };
    }
    if let Some(prefix) = &a.prefix {
        recipe.id_prefix = prefix.clone();
    }
    let instances = gen_dataset(&recipe).map_err(|e| Failure::Data(e.to_string()))?;
    let records: Vec<Record> = instances.into_iter().map(Record::new).collect();
    write_instances(&a.out, &records)?;
    eprintln!("wrote {} instances to {}", records.len(), a.out.display());

    let mut args = vec!["gen".to_string()];
    if let Some(r) = &a.recipe {
        args.extend(path_arg("--recipe", r));
    }
    args.extend([
        "--seed".into(),
        recipe.seed.to_string(),
        "--pn-sets".into(),
        recipe.pn_sets.to_string(),
        "--ops".into(),
        match recipe.ops {
            OpsMode::Reduced => "reduced".into(),
            OpsMode::Full => "full".into(),
        },
        "--costs".into(),
        match recipe.costs {
            CostMode::Uniform => "uniform".into(),
            CostMode::Random => "random".into(),
        },
        "--prefix".into(),
        recipe.id_prefix.clone(),
    ]);
    args.extend(path_arg("--out", &a.out));
    Ok(Outcome {
        subcommand: "gen",
        args,
        params: json!({"recipe": recipe.to_toml()}),
        seed: Some(recipe.seed),
        inputs: a.recipe.iter().cloned().collect(),
        outputs: vec![a.out.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn cmd_solve(a: &SolveArgs) -> Result<Outcome> {
    if a.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let time_limit = match a.caps_seconds {
        None => None,
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => {
            return Err(Failure::Usage(format!(
                "--caps-seconds {s} is not a valid duration"
            )))
        }
    };
    let caps = Caps {
        max_footprints: a.caps_footprints,
        time_limit,
        workers: a.workers,
    };
    let items = read_records_lenient(BufReader::new(File::open(&a.input)?))?;
    let mut out = BufWriter::new(File::create(&a.out)?);
    let (mut errors, mut degraded, mut solved) = (0, 0, 0);
    for item in items {
        let line = match item {
            Ok(rec) => match solve(&rec.instance, &caps) {
                Ok(sol) => {
                    solved += 1;
                    if !sol.minimal {
                        degraded += 1;
                    }
                    record_to_line(&Record::solved(rec.instance, sol.regex, sol.minimal))?
                }
                Err(e) => {
                    errors += 1;
                    eprintln!("{}: {e}", rec.instance.id);
                    json!({"id": rec.instance.id, "error": e.to_string()}).to_string()
                }
            },
            Err(bad) => {
                errors += 1;
                eprintln!("{}", bad.error);
                json!({"id": bad.id, "line": bad.line, "error": bad.error.to_string()}).to_string()
            }
        };
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    eprintln!("solved {solved} instances ({degraded} not proven minimal), {errors} errors");

    let mut args = vec!["solve".to_string()];
    args.extend(path_arg("--in", &a.input));
    args.extend(path_arg("--out", &a.out));
    args.extend(["--caps-footprints".into(), a.caps_footprints.to_string()]);
    if let Some(s) = a.caps_seconds {
        args.extend(["--caps-seconds".into(), s.to_string()]);
    }
    args.extend(["--workers".into(), a.workers.to_string()]);
    Ok(Outcome {
        subcommand: "solve",
        args,
        params: json!({"caps_footprints": a.caps_footprints, "caps_seconds": a.caps_seconds, "workers": a.workers}),
        seed: None,
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        data_errors: errors,
        degraded,
    })
}

fn cmd_baseline(a: &BaselineArgs) -> Result<Outcome> {
    let test = read_instances(&a.input)?;
    let corpus = match (a.kind, &a.train) {
        (BaselineKind::Trivial, _) => None,
        (_, None) => return Err(Failure::Usage("retrieval baselines need --train".into())),
        (_, Some(path)) => {
            let mut solved = Vec::new();
            for rec in read_instances(path)? {
                let Some(gold) = rec.solution else {
                    return Err(Failure::Data(format!(
                        "training instance {} has no solution",
                        rec.instance.id
                    )));
                };
                solved.push(Solved {
                    instance: rec.instance,
                    regex: gold.regex,
                });
            }
            let corpus = TrainCorpus::new(solved)
                .map_err(|id| Failure::Data(format!("training solution of {id} is not precise")))?;
            if corpus.is_empty() {
                return Err(Failure::Data("training file is empty".into()));
            }
            Some(corpus)
        }
    };
    let preds: Vec<Prediction> = test
        .iter()
        .map(|rec| {
            let inst = &rec.instance;
            let regex = match (a.kind, &corpus) {
                (BaselineKind::PnRetrieval, Some(c)) => pn_retrieval(inst, c),
                (BaselineKind::ReRetrieval, Some(c)) => re_retrieval(inst, c),
                _ => Some(trivial(inst)),
            };
            Prediction::new(
                inst.id.clone(),
                regex.map(|r| r.to_string()).unwrap_or_default(),
            )
        })
        .collect();
    write_predictions(File::create(&a.out)?, &preds)?;
    let kind = match a.kind {
        BaselineKind::Trivial => "trivial",
        BaselineKind::PnRetrieval => "pn-retrieval",
        BaselineKind::ReRetrieval => "re-retrieval",
    };
    eprintln!(
        "wrote {} {kind} predictions to {}",
        preds.len(),
        a.out.display()
    );
    let mut args = vec!["baseline".to_string(), "--kind".into(), kind.into()];
    let mut inputs = vec![a.input.clone()];
    if let Some(t) = &a.train {
        args.extend(path_arg("--train", t));
        inputs.push(t.clone());
    }
    args.extend(path_arg("--in", &a.input));
    args.extend(path_arg("--out", &a.out));
    Ok(Outcome {
        subcommand: "baseline",
        args,
        params: json!({"kind": kind}),
        seed: None,
        inputs,
        outputs: vec![a.out.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn cmd_score(a: &ScoreArgs) -> Result<Outcome> {
    let gold = read_instances(&a.gold)?;
    let preds = read_predictions(BufReader::new(File::open(&a.pred)?))?;
    let report = score(&preds, &gold).map_err(|e| Failure::Data(e.to_string()))?;
    let mut json = report.to_json();
    json["leaderboard_key"] = json["minimal_ratio_global"].clone();
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    fs::write(&a.out, text)?;
    print!("{}", report.table());
    eprintln!(
        "leaderboard key (global minimal ratio): {}",
        leaderboard_key(&report)
    );
    let mut args = vec!["score".to_string()];
    args.extend(path_arg("--pred", &a.pred));
    args.extend(path_arg("--gold", &a.gold));
    args.extend(path_arg("--out", &a.out));
    Ok(Outcome {
        subcommand: "score",
        args,
        params: json!({}),
        seed: None,
        inputs: vec![a.pred.clone(), a.gold.clone()],
        outputs: vec![a.out.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn cmd_encode(a: &EncodeArgs) -> Result<Outcome> {
    let records = read_instances(&a.input)?;
    let mut out = BufWriter::new(File::create(&a.out)?);
    for rec in &records {
        if a.with_ids {
            write!(out, "{}\t", rec.id())?;
        }
        writeln!(out, "{}", encode_tokens(rec).join(" "))?;
    }
    out.flush()?;
    let mut args = vec!["encode".to_string()];
    args.extend(path_arg("--in", &a.input));
    args.extend(path_arg("--out", &a.out));
    if a.with_ids {
        args.push("--with-ids".into());
    }
    Ok(Outcome {
        subcommand: "encode",
        args,
        params: json!({"with_ids": a.with_ids}),
        seed: None,
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn cmd_decode(a: &DecodeArgs) -> Result<Outcome> {
    let alphabet = Alphabet::new(&a.alphabet).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(File::open(&a.input)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fallback_id = format!("decoded-{:05}", i + 1);
        let (id, body) = line.split_once('\t').unwrap_or((&fallback_id, &line));
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let rec = decode_tokens(&tokens, id, &alphabet)
            .map_err(|e| Failure::Data(format!("line {}: {e}", i + 1)))?;
        records.push(rec);
    }
    write_instances(&a.out, &records)?;
    let mut args = vec!["decode".to_string()];
    args.extend(path_arg("--in", &a.input));
    args.extend(path_arg("--out", &a.out));
    args.extend(["--alphabet".into(), a.alphabet.clone()]);
    Ok(Outcome {
        subcommand: "decode",
        args,
        params: json!({"alphabet": a.alphabet}),
        seed: None,
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn cmd_split(a: &SplitArgs) -> Result<Outcome> {
    let records = read_instances(&a.input)?;
    let (train, test) = split_train_test(records, a.ratio, a.seed)?;
    write_instances(&a.train, &train)?;
    write_instances(&a.test, &test)?;
    eprintln!("{} train, {} test", train.len(), test.len());
    let mut args = vec!["split".to_string()];
    args.extend(path_arg("--in", &a.input));
    args.extend(path_arg("--train", &a.train));
    args.extend(path_arg("--test", &a.test));
    args.extend([
        "--ratio".into(),
        a.ratio.to_string(),
        "--seed".into(),
        a.seed.to_string(),
    ]);
    Ok(Outcome {
        subcommand: "split",
        args,
        params: json!({"ratio": a.ratio}),
        seed: Some(a.seed),
        inputs: vec![a.input.clone()],
        outputs: vec![a.train.clone(), a.test.clone()],
        data_errors: 0,
        degraded: 0,
    })
}

fn run_command(command: &Command) -> Result<Outcome> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Score(a) => cmd_score(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Split(a) => cmd_split(a),
        Command::Replay(_) => Err(Failure::Usage(
            "a manifest cannot replay another replay".into(),
        )),
    }
}

fn cmd_replay(a: &ReplayArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.manifest)?;
    let m: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Data(format!("manifest: {e}")))?;
    let args: Vec<String> = m
        .get("args")
        .and_then(Value::as_array)
        .map(|v| {
            v.iter()
                .filter_map(|s| s.as_str().map(String::from))
                .collect()
        })
        .ok_or_else(|| Failure::Data("manifest has no args".into()))?;
    if let Some(cwd) = m.get("cwd").and_then(Value::as_str) {
        std::env::set_current_dir(cwd)?;
    }
    for input in manifest::recorded(&m, "inputs").unwrap_or_default() {
        if manifest::sha256_file(&input.path)? != input.sha256 {
            return Err(Failure::Data(format!(
                "input {} changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let cli = Cli::try_parse_from(std::iter::once("rei".to_string()).chain(args))
        .map_err(|e| Failure::Data(format!("manifest args: {e}")))?;
    let outcome = run_command(&cli.command)?;
    let mut mismatched = 0;
    for out in manifest::recorded(&m, "outputs").unwrap_or_default() {
        let now = manifest::sha256_file(&out.path)?;
        if now == out.sha256 {
            eprintln!("{}: identical", out.path.display());
        } else {
            eprintln!(
                "{}: differs ({} recorded, {now} now)",
                out.path.display(),
                out.sha256
            );
            mismatched += 1;
        }
    }
    if mismatched > 0 {
        return Err(Failure::Data(format!("{mismatched} outputs differ")));
    }
    Ok(exit_for(&outcome))
}

fn exit_for(o: &Outcome) -> ExitCode {
    if o.data_errors > 0 {
        ExitCode::from(3)
    } else if o.degraded > 0 {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Replay(a) => cmd_replay(a),
        command => run_command(command).and_then(|o| {
            RunRecord {
                subcommand: o.subcommand,
                args: o.args.clone(),
                params: o.params.clone(),
                seed: o.seed,
                inputs: o.inputs.clone(),
                outputs: o.outputs.clone(),
                elapsed: started.elapsed(),
            }
            .write()?;
            Ok(exit_for(&o))
        }),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
