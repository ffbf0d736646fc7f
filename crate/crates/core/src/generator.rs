//! Seeded generation of PN-sets, cost functions and whole datasets.
//!
//! All randomness comes from ChaCha8 streams: a dataset seed selects the key
//! and each PN-set gets its own stream number, so instances can be generated
//! independently and in any order with identical results.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Instance, PnSet};
use crate::regex::{Alphabet, CostFunction, Op, OperatorSet, DISABLED_COST};

/// Range operator costs are drawn from.
pub const COST_RANGE: RangeInclusive<u64> = 1..=49;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Uniform over all strings of length `0..=le`.
    Type1,
    /// Length uniform in `0..=le`, then a uniform string of that length.
    Type2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub scheme: Scheme,
    pub sigma: Alphabet,
    pub le: usize,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error(
        "cannot draw {need} distinct strings: only {available} strings of length <= {le} exist"
    )]
    Infeasible {
        need: usize,
        available: u64,
        le: usize,
    },
    #[error("p and n must be at least 1")]
    EmptySide,
    #[error("invalid recipe: {0}")]
    Recipe(String),
}

/// Number of strings over `sigma` of length at most `le`, saturating.
pub fn strings_up_to(sigma: &Alphabet, le: usize) -> u64 {
    let k = sigma.len() as u64;
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..=le {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(k);
    }
    total
}

fn string_of_len(sigma: &Alphabet, len: usize, mut index: u64) -> String {
    let k = sigma.len() as u64;
    let syms = sigma.as_bytes();
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = syms[(index % k) as usize];
        index /= k;
    }
    String::from_utf8(out).expect("alphabet is ASCII")
}

/// One string drawn from the scheme's distribution.
pub fn sample_string<R: Rng + ?Sized>(
    scheme: Scheme,
    sigma: &Alphabet,
    le: usize,
    rng: &mut R,
) -> String {
    let k = sigma.len() as u64;
    match scheme {
        Scheme::Type1 => {
            let mut index = rng.random_range(0..strings_up_to(sigma, le));
            let mut len = 0;
            let mut layer = 1u64;
            while index >= layer {
                index -= layer;
                len += 1;
                layer *= k;
            }
            string_of_len(sigma, len, index)
        }
        Scheme::Type2 => {
            let len = rng.random_range(0..=le);
            let count = k.pow(len as u32);
            string_of_len(sigma, len, rng.random_range(0..count))
        }
    }
}

/// Draws a PN-set: `p` distinct positives, then `n` distinct negatives
/// disjoint from them. Draws that collide are rejected and redrawn.
pub fn gen_pn_with<R: Rng + ?Sized>(params: &GenParams, rng: &mut R) -> Result<PnSet, GenError> {
    if params.p == 0 || params.n == 0 {
        return Err(GenError::EmptySide);
    }
    let available = strings_up_to(&params.sigma, params.le);
    let need = params.p + params.n;
    if need as u64 > available {
        return Err(GenError::Infeasible {
            need,
            available,
            le: params.le,
        });
    }
    let mut pos: Vec<String> = Vec::with_capacity(params.p);
    while pos.len() < params.p {
        let w = sample_string(params.scheme, &params.sigma, params.le, rng);
        if !pos.contains(&w) {
            pos.push(w);
        }
    }
    let mut neg: Vec<String> = Vec::with_capacity(params.n);
    while neg.len() < params.n {
        let w = sample_string(params.scheme, &params.sigma, params.le, rng);
        if !pos.contains(&w) && !neg.contains(&w) {
            neg.push(w);
        }
    }
    Ok(PnSet { pos, neg })
}

/// Type 1 PN-set from `params.seed`.
pub fn gen_type1(params: &GenParams) -> Result<PnSet, GenError> {
    let params = GenParams {
        scheme: Scheme::Type1,
        ..params.clone()
    };
    gen_pn_with(&params, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

/// Type 2 PN-set from `params.seed`.
pub fn gen_type2(params: &GenParams) -> Result<PnSet, GenError> {
    let params = GenParams {
        scheme: Scheme::Type2,
        ..params.clone()
    };
    gen_pn_with(&params, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

/// Random cost function: every cost relevant to `ops` uniform on `1..=49`;
/// costs of operators outside `ops` are fixed to [`DISABLED_COST`].
pub fn gen_cost_with<R: Rng + ?Sized>(ops: OperatorSet, rng: &mut R) -> CostFunction {
    let mut cf = CostFunction::UNIFORM;
    cf.atom = rng.random_range(COST_RANGE);
    for op in [
        Op::Option,
        Op::Star,
        Op::Complement,
        Op::Concat,
        Op::And,
        Op::Or,
        Op::Minus,
    ] {
        if ops.contains(op) {
            cf.set(op, rng.random_range(COST_RANGE));
        } else {
            cf.set(op, DISABLED_COST);
        }
    }
    cf
}

pub fn gen_cost(ops: OperatorSet, seed: u64) -> CostFunction {
    gen_cost_with(ops, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    Uniform,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpsMode {
    Reduced,
    Full,
}

impl OpsMode {
    pub fn set(self) -> OperatorSet {
        match self {
            OpsMode::Reduced => OperatorSet::REDUCED,
            OpsMode::Full => OperatorSet::FULL,
        }
    }
}

/// A dataset recipe. Ranges are inclusive `[lo, hi]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub seed: u64,
    pub pn_sets: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
    #[serde(default = "default_ops")]
    pub ops: OpsMode,
    #[serde(default = "default_costs")]
    pub costs: CostMode,
    /// Random cost functions per PN-set in addition to the uniform one.
    #[serde(default = "default_random_costs")]
    pub random_cost_functions: usize,
    /// Probability that a PN-set uses Type 1.
    #[serde(default = "default_type1_fraction")]
    pub type1_fraction: f64,
    #[serde(default = "default_pn_range")]
    pub p_range: [usize; 2],
    #[serde(default = "default_pn_range")]
    pub n_range: [usize; 2],
    #[serde(default = "default_type1_le")]
    pub type1_le_range: [usize; 2],
    #[serde(default = "default_type2_le")]
    pub type2_le_range: [usize; 2],
    #[serde(default = "default_prefix")]
    pub id_prefix: String,
}

fn default_alphabet() -> String {
    "01".into()
}
fn default_ops() -> OpsMode {
    OpsMode::Reduced
}
fn default_costs() -> CostMode {
    CostMode::Uniform
}
fn default_random_costs() -> usize {
    19
}
fn default_type1_fraction() -> f64 {
    0.5
}
fn default_pn_range() -> [usize; 2] {
    [1, 10]
}
fn default_type1_le() -> [usize; 2] {
    [0, 7]
}
fn default_type2_le() -> [usize; 2] {
    [0, 10]
}
fn default_prefix() -> String {
    "rei".into()
}

impl Recipe {
    pub fn new(seed: u64, pn_sets: usize) -> Self {
        Recipe {
            seed,
            pn_sets,
            alphabet: default_alphabet(),
            ops: default_ops(),
            costs: default_costs(),
            random_cost_functions: default_random_costs(),
            type1_fraction: default_type1_fraction(),
            p_range: default_pn_range(),
            n_range: default_pn_range(),
            type1_le_range: default_type1_le(),
            type2_le_range: default_type2_le(),
            id_prefix: default_prefix(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, GenError> {
        toml::from_str(text).map_err(|e| GenError::Recipe(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("recipe serializes")
    }

    /// Instances generated per PN-set.
    pub fn variants(&self) -> usize {
        match self.costs {
            CostMode::Uniform => 1,
            CostMode::Random => 1 + self.random_cost_functions,
        }
    }

    fn validate(&self) -> Result<Alphabet, GenError> {
        let sigma = Alphabet::new(&self.alphabet).map_err(|e| GenError::Recipe(e.to_string()))?;
        for (name, [lo, hi]) in [
            ("p_range", self.p_range),
            ("n_range", self.n_range),
            ("type1_le_range", self.type1_le_range),
            ("type2_le_range", self.type2_le_range),
        ] {
            if lo > hi {
                return Err(GenError::Recipe(format!("{name} is empty")));
            }
        }
        if self.p_range[0] == 0 || self.n_range[0] == 0 {
            return Err(GenError::EmptySide);
        }
        if !(0.0..=1.0).contains(&self.type1_fraction) {
            return Err(GenError::Recipe("type1_fraction must lie in [0, 1]".into()));
        }
        // Parameters are redrawn until feasible, so the largest lengths must admit p + n strings.
        for (use_it, [_, hi]) in [
            (self.type1_fraction > 0.0, self.type1_le_range),
            (self.type1_fraction < 1.0, self.type2_le_range),
        ] {
            let need = self.p_range[0] + self.n_range[0];
            if use_it && strings_up_to(&sigma, hi) < need as u64 {
                return Err(GenError::Infeasible {
                    need,
                    available: strings_up_to(&sigma, hi),
                    le: hi,
                });
            }
        }
        Ok(sigma)
    }
}

/// Deterministic stream for PN-set number `set`; cost functions use the odd stream next to it.
fn set_rng(seed: u64, set: usize, costs: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * set as u64 + costs as u64);
    rng
}

/// Scheme and sizes for one PN-set, redrawn until `p + n` strings exist.
fn draw_params(recipe: &Recipe, sigma: &Alphabet, rng: &mut ChaCha8Rng) -> GenParams {
    let scheme = if rng.random_bool(recipe.type1_fraction) {
        Scheme::Type1
    } else {
        Scheme::Type2
    };
    let le_range = match scheme {
        Scheme::Type1 => recipe.type1_le_range,
        Scheme::Type2 => recipe.type2_le_range,
    };
    loop {
        let le = rng.random_range(le_range[0]..=le_range[1]);
        let p = rng.random_range(recipe.p_range[0]..=recipe.p_range[1]);
        let n = rng.random_range(recipe.n_range[0]..=recipe.n_range[1]);
        if (p + n) as u64 <= strings_up_to(sigma, le) {
            return GenParams {
                scheme,
                sigma: sigma.clone(),
                le,
                p,
                n,
                seed: recipe.seed,
            };
        }
    }
}

/// One PN-set of the recipe with its generation parameters.
pub fn gen_pn_set(recipe: &Recipe, set: usize) -> Result<(GenParams, PnSet), GenError> {
    let sigma = recipe.validate()?;
    let mut rng = set_rng(recipe.seed, set, false);
    let params = draw_params(recipe, &sigma, &mut rng);
    let pn = gen_pn_with(&params, &mut rng)?;
    Ok((params, pn))
}

/// All instances of a recipe: per PN-set the uniform-cost instance, followed
/// by the random-cost variants when costs are random.
pub fn gen_dataset(recipe: &Recipe) -> Result<Vec<Instance>, GenError> {
    let sigma = recipe.validate()?;
    let ops = recipe.ops.set();
    let mut out = Vec::with_capacity(recipe.pn_sets * recipe.variants());
    for set in 0..recipe.pn_sets {
        let (_, pn) = gen_pn_set(recipe, set)?;
        let mut cost_rng = set_rng(recipe.seed, set, true);
        for variant in 0..recipe.variants() {
            let cf = if variant == 0 {
                CostFunction::UNIFORM.restricted(ops)
            } else {
                gen_cost_with(ops, &mut cost_rng)
            };
            out.push(Instance {
                id: format!("{}-{:05}-{:02}", recipe.id_prefix, set, variant),
                alphabet: sigma.clone(),
                pn: pn.clone(),
                cf,
                ops,
            });
        }
    }
    Ok(out)
}
