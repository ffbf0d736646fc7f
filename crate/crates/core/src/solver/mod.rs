//! Exact regular expression inference.
//!
//! [`solve`] returns a precise regex of minimal cost for an instance, or a
//! precise fallback flagged `minimal = false` when a resource cap is hit.

pub mod footprint;
pub mod search;

pub use footprint::{Footprint, FootprintLayout, MAX_STRING_LEN};
pub use search::{CapHit, Caps, Search, SearchStats, Solution, SolveError};

use crate::problem::{Instance, PnSet};
use crate::regex::{Op, OperatorSet, Regex, Symbol};

/// Solves `inst` exactly within `caps`.
pub fn solve(inst: &Instance, caps: &Caps) -> Result<Solution, SolveError> {
    let mut search = Search::new(inst, caps.clone())?;
    let sol = search.run();
    assert!(
        inst.pn.is_precise(&sol.regex),
        "solver returned imprecise {} for {}",
        sol.regex,
        inst.id
    );
    Ok(sol)
}

/// Cost of the trivial solution, the union of all positive strings.
pub fn trivial_cost_bound(inst: &Instance) -> u64 {
    crate::baselines::trivial(inst).cost(&inst.cf)
}

/// A precise regex available under the instance's operators, used as the
/// search bound and as the anytime answer. This is the trivial solution,
/// except when `P` is empty and `E` is not allowed: then it is the shortest
/// string outside `N`.
pub fn fallback_regex(inst: &Instance) -> Regex {
    if !inst.pn.pos.is_empty() || inst.ops.contains(Op::EmptySet) {
        return crate::baselines::trivial(inst);
    }
    let mut len = 0;
    loop {
        for w in crate::matcher::all_strings_of_len(&inst.alphabet, len) {
            if !inst.pn.neg.contains(&w) {
                return Regex::word(&w);
            }
        }
        len += 1;
    }
}

/// Leaf footprints for `pn`: `e`, each literal of `sigma`, and `E`, as enabled by `ops`.
pub fn leaf_footprints(
    pn: &PnSet,
    sigma: &crate::regex::Alphabet,
    ops: OperatorSet,
) -> Vec<(Regex, Footprint)> {
    let layout = FootprintLayout::new(&pn.pos, &pn.neg);
    let mut out = Vec::new();
    if ops.contains(Op::Epsilon) {
        out.push((Regex::Epsilon, layout.leaf(Op::Epsilon, None)));
    }
    if ops.contains(Op::Literal) {
        for s in sigma.symbols() {
            out.push((Regex::Literal(s), layout.leaf(Op::Literal, Some(s))));
        }
    }
    if ops.contains(Op::EmptySet) {
        out.push((Regex::EmptySet, layout.leaf(Op::EmptySet, None)));
    }
    out
}

/// Footprint of `op` applied to operand footprints over the same layout.
pub fn fp_combine(
    layout: &FootprintLayout,
    op: Op,
    a: &Footprint,
    b: Option<&Footprint>,
) -> Footprint {
    layout.combine(op, a, b)
}

/// Footprint of an arbitrary regex, computed bottom-up through [`fp_combine`].
pub fn footprint_of(layout: &FootprintLayout, r: &Regex) -> Footprint {
    match r {
        Regex::EmptySet => layout.leaf(Op::EmptySet, None),
        Regex::Epsilon => layout.leaf(Op::Epsilon, None),
        Regex::Literal(s) => layout.leaf(Op::Literal, Some(Symbol(s.0))),
        Regex::Option(c) | Regex::Star(c) | Regex::Complement(c) => {
            layout.combine(r.op(), &footprint_of(layout, c), None)
        }
        Regex::Concat(a, b) | Regex::And(a, b) | Regex::Or(a, b) | Regex::Minus(a, b) => layout
            .combine(
                r.op(),
                &footprint_of(layout, a),
                Some(&footprint_of(layout, b)),
            ),
    }
}
