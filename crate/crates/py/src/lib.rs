//! Python bindings: regexes, instances, the exact solver, generation,
//! the trivial baseline and scoring.
//!
//! Instances and gold records cross the boundary as the same JSON lines the
//! command-line tool reads and writes.

use std::collections::HashMap;
use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rei_core::dataset::{encode_tokens, record_from_line, record_to_line, Prediction, Record};
use rei_core::generator::{gen_dataset, CostMode, OpsMode, Recipe};
use rei_core::regex::{Alphabet, CostFunction, Op, OperatorSet};
use rei_core::solver::Caps;
use rei_core::{baselines, matcher, syntax, PnSet};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ops_named(name: &str) -> PyResult<OperatorSet> {
    OperatorSet::from_name(name).ok_or_else(|| err(format!("unknown operator set {name:?}")))
}

const COST_KEYS: [(&str, Op); 8] = [
    ("A", Op::Literal),
    ("?", Op::Option),
    ("*", Op::Star),
    ("~", Op::Complement),
    (".", Op::Concat),
    ("&", Op::And),
    ("+", Op::Or),
    ("-", Op::Minus),
];

fn costs_from(map: Option<HashMap<String, u64>>) -> PyResult<CostFunction> {
    let mut cf = CostFunction::UNIFORM;
    for (key, value) in map.unwrap_or_default() {
        let op = COST_KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, op)| op)
            .ok_or_else(|| err(format!("unknown cost key {key:?}")))?;
        cf.set(op, value);
    }
    if !cf.is_valid() {
        return Err(err("costs must be at least 1"));
    }
    Ok(cf)
}

/// A regular expression over the binary alphabet.
#[pyclass(frozen, eq, hash, str, skip_from_py_object, name = "Regex")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyRegex(rei_core::Regex);

impl std::fmt::Display for PyRegex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[pymethods]
impl PyRegex {
    #[staticmethod]
    #[pyo3(signature = (text, ops = "full"))]
    fn parse(text: &str, ops: &str) -> PyResult<Self> {
        syntax::parse(text, &Alphabet::binary(), ops_named(ops)?)
            .map(PyRegex)
            .map_err(err)
    }

    fn matches(&self, word: &str) -> bool {
        matcher::matches(&self.0, word)
    }

    /// Total cost under `costs` (keys `A ? * . + ~ & -`, missing keys cost 1).
    #[pyo3(signature = (costs = None))]
    fn cost(&self, costs: Option<HashMap<String, u64>>) -> PyResult<u64> {
        Ok(self.0.cost(&costs_from(costs)?))
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    fn __repr__(&self) -> String {
        format!("Regex('{}')", self.0)
    }
}

#[pyclass(frozen, skip_from_py_object, name = "Instance")]
#[derive(Clone)]
struct PyInstance(rei_core::Instance);

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (pos, neg, ops = "reduced", costs = None, id = "instance"))]
    fn new(
        pos: Vec<String>,
        neg: Vec<String>,
        ops: &str,
        costs: Option<HashMap<String, u64>>,
        id: &str,
    ) -> PyResult<Self> {
        let inst = rei_core::Instance::new(
            id,
            PnSet::new(pos, neg),
            costs_from(costs)?,
            ops_named(ops)?,
        );
        inst.validate().map_err(err)?;
        Ok(PyInstance(inst))
    }

    /// Reads one JSON record line; any stored solution is ignored.
    #[staticmethod]
    fn from_json(line: &str) -> PyResult<Self> {
        Ok(PyInstance(record_from_line(line, 1).map_err(err)?.instance))
    }

    /// One JSON record line, with `solution` as its reference answer if given.
    #[pyo3(signature = (solution = None, minimal = true))]
    fn to_json(&self, solution: Option<&PyRegex>, minimal: bool) -> PyResult<String> {
        record_to_line(&self.record(solution, minimal)).map_err(err)
    }

    /// The tokenized form used for sequence models.
    #[pyo3(signature = (solution = None))]
    fn tokens(&self, solution: Option<&PyRegex>) -> Vec<String> {
        encode_tokens(&self.record(solution, true))
    }

    fn is_precise(&self, regex: &PyRegex) -> bool {
        self.0.pn.is_precise(&regex.0)
    }

    fn cost(&self, regex: &PyRegex) -> u64 {
        self.0.cost(&regex.0)
    }

    #[getter]
    fn id(&self) -> &str {
        &self.0.id
    }

    #[getter]
    fn pos(&self) -> Vec<String> {
        self.0.pn.pos.clone()
    }

    #[getter]
    fn neg(&self) -> Vec<String> {
        self.0.pn.neg.clone()
    }

    #[getter]
    fn ops(&self) -> &'static str {
        self.0.ops.name().unwrap_or("custom")
    }

    #[getter]
    fn costs(&self) -> HashMap<&'static str, u64> {
        COST_KEYS
            .iter()
            .filter(|(_, op)| self.0.ops.contains(*op))
            .map(|&(k, op)| (k, self.0.cf.of(op)))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(id={:?}, pos={:?}, neg={:?}, ops={:?})",
            self.0.id,
            self.0.pn.pos,
            self.0.pn.neg,
            self.ops()
        )
    }
}

impl PyInstance {
    fn record(&self, solution: Option<&PyRegex>, minimal: bool) -> Record {
        match solution {
            Some(r) => Record::solved(self.0.clone(), r.0.clone(), minimal),
            None => Record::new(self.0.clone()),
        }
    }
}

#[pyclass(frozen, get_all, name = "Solution")]
struct PySolution {
    regex: PyRegex,
    cost: u64,
    /// False when a cap cut the search short.
    minimal: bool,
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        let minimal = if self.minimal { "True" } else { "False" };
        format!(
            "Solution(regex='{}', cost={}, minimal={minimal})",
            self.regex.0, self.cost
        )
    }
}

/// Finds a precise regex of minimal cost. The GIL is released while searching.
#[pyfunction]
#[pyo3(signature = (instance, max_footprints = None, seconds = None, workers = 1))]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    max_footprints: Option<usize>,
    seconds: Option<f64>,
    workers: usize,
) -> PyResult<PySolution> {
    let mut caps = Caps {
        workers: workers.max(1),
        time_limit: seconds.map(Duration::from_secs_f64),
        ..Caps::default()
    };
    if let Some(n) = max_footprints {
        caps.max_footprints = n;
    }
    let inst = &instance.0;
    let sol = py.detach(|| rei_core::solve(inst, &caps)).map_err(err)?;
    Ok(PySolution {
        regex: PyRegex(sol.regex),
        cost: sol.cost,
        minimal: sol.minimal,
    })
}

/// Generates instances from a seed, or from a TOML recipe when given.
#[pyfunction]
#[pyo3(signature = (seed = 0, pn_sets = 10, ops = "reduced", costs = "uniform", recipe = None))]
fn generate(
    seed: u64,
    pn_sets: usize,
    ops: &str,
    costs: &str,
    recipe: Option<&str>,
) -> PyResult<Vec<PyInstance>> {
    let recipe = match recipe {
        Some(text) => Recipe::from_toml(text).map_err(err)?,
        None => {
            let mut r = Recipe::new(seed, pn_sets);
            r.ops = match ops {
                "reduced" => OpsMode::Reduced,
                "full" => OpsMode::Full,
                _ => return Err(err(format!("unknown operator set {ops:?}"))),
            };
            r.costs = match costs {
                "uniform" => CostMode::Uniform,
                "random" => CostMode::Random,
                _ => return Err(err(format!("unknown cost mode {costs:?}"))),
            };
            r
        }
    };
    Ok(gen_dataset(&recipe)
        .map_err(err)?
        .into_iter()
        .map(PyInstance)
        .collect())
}

/// The union of all positive strings.
#[pyfunction]
fn trivial(instance: &PyInstance) -> PyRegex {
    PyRegex(baselines::trivial(&instance.0))
}

/// Scores predictions (id to regex text) against gold JSON record lines and
/// returns the metrics as a dict.
#[pyfunction]
fn score<'py>(
    py: Python<'py>,
    gold: Vec<String>,
    predictions: HashMap<String, String>,
) -> PyResult<Bound<'py, PyAny>> {
    let gold = gold
        .iter()
        .enumerate()
        .map(|(i, line)| record_from_line(line, i + 1))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let mut preds: Vec<Prediction> = predictions
        .into_iter()
        .map(|(id, text)| Prediction::new(id, text))
        .collect();
    preds.sort_by(|a, b| a.id.cmp(&b.id));
    let report = rei_core::score(&preds, &gold).map_err(err)?;
    py.import("json")?
        .call_method1("loads", (report.to_json().to_string(),))
}

#[pymodule]
fn pyrei(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRegex>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(trivial, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    Ok(())
}
