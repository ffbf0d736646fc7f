//! Regular expression inference toolkit.
//!
//! Given positive and negative example strings, a cost per regex constructor
//! and a set of allowed constructors, find a regex that accepts every positive,
//! rejects every negative, and has minimal total cost. The crate provides the
//! regex syntax, a derivative-based matcher, an exact bottom-up solver,
//! seeded instance generation, heuristic baselines, dataset I/O and the
//! challenge scoring metrics.

pub mod baselines;
pub mod dataset;
pub mod generator;
pub mod matcher;
pub mod problem;
pub mod regex;
pub mod scoring;
pub mod solver;
pub mod syntax;

pub use dataset::{Gold, Prediction, Record};
pub use generator::{gen_dataset, GenParams, Recipe, Scheme};
pub use problem::{Instance, PnSet, ProblemError};
pub use regex::{Alphabet, CostFunction, Op, OperatorSet, Regex, Symbol};
pub use scoring::{leaderboard_key, score, ScoreReport};
pub use solver::{solve, Caps, Solution};
pub use syntax::{parse, print, ParseError};
