//! Cost-stratified bottom-up enumeration with footprint deduplication.
//!
//! Stratum `k` holds every footprint first reachable at exact cost `k`,
//! each with a single witness regex. It is built from unary operators applied
//! to stratum `k - c_op` and binary operators applied to all stratum pairs
//! `(k1, k2)` with `k1 + k2 + c_op = k`. A candidate whose footprint already
//! occurs in a cheaper stratum is dropped. Among same-cost candidates with the
//! same new footprint the one with the lexicographically least canonical
//! printed form is kept, so the strata do not depend on enumeration order or
//! on how the work was split across threads. The search stops at the first
//! stratum containing a precise footprint.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{BuildHasher, BuildHasherDefault};
use std::ops::Range;
use std::time::{Duration, Instant};

use hashbrown::HashTable;
use rustc_hash::FxHasher;
use thiserror::Error;

use super::footprint::{Footprint, FootprintLayout, MAX_STRING_LEN};
use crate::problem::{Instance, ProblemError};
use crate::regex::{Op, Regex, Symbol};

/// Resource limits. Exceeding either degrades the run to anytime mode: the
/// best precise regex known so far is returned with `minimal = false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of footprints retained across all strata.
    pub max_footprints: usize,
    pub time_limit: Option<Duration>,
    /// Worker threads used to build a stratum. 1 runs on the calling thread.
    pub workers: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_footprints: 10_000_000,
            time_limit: None,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub regex: Regex,
    pub cost: u64,
    /// True when the search completed; false when a cap cut it short.
    pub minimal: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Problem(#[from] ProblemError),
    #[error("example string {0:?} is longer than {MAX_STRING_LEN} symbols")]
    StringTooLong(String),
}

/// Which cap stopped the search, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapHit {
    Footprints,
    Time,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub candidates: u64,
    pub retained: usize,
    pub strata: usize,
}

const NONE: u32 = u32::MAX;

/// A witness node. Children refer to earlier nodes by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Node {
    op: Op,
    sym: u8,
    left: u32,
    right: u32,
}

type FxBuild = BuildHasherDefault<FxHasher>;

fn hash_words(words: &[u64]) -> u64 {
    FxBuild::default().hash_one(words)
}

/// Canonical printed form of a node, produced lazily so that two forms can be
/// compared without building strings.
struct PrintIter<'a> {
    nodes: &'a [Node],
    stack: Vec<Tok>,
}

#[derive(Clone, Copy)]
enum Tok {
    Node(u32),
    Byte(u8),
}

impl<'a> PrintIter<'a> {
    fn new(nodes: &'a [Node], root: Node) -> Self {
        let mut it = PrintIter {
            nodes,
            stack: Vec::with_capacity(24),
        };
        it.expand_onto_stack(root);
        it
    }

    /// Pushes the printed form of `node` so that its first byte is on top.
    fn expand_onto_stack(&mut self, node: Node) {
        let s = &mut self.stack;
        match node.op {
            Op::EmptySet | Op::Epsilon | Op::Literal => s.push(Tok::Byte(leaf_byte(node))),
            Op::Option | Op::Star => {
                s.push(Tok::Byte(b')'));
                s.push(Tok::Byte(node.op.glyph().unwrap() as u8));
                s.push(Tok::Node(node.left));
                s.push(Tok::Byte(b'('));
            }
            Op::Complement => {
                s.push(Tok::Byte(b')'));
                s.push(Tok::Node(node.left));
                s.push(Tok::Byte(b'~'));
                s.push(Tok::Byte(b'('));
            }
            Op::Concat | Op::And | Op::Or | Op::Minus => {
                s.push(Tok::Byte(b')'));
                s.push(Tok::Node(node.right));
                s.push(Tok::Byte(node.op.glyph().unwrap() as u8));
                s.push(Tok::Node(node.left));
                s.push(Tok::Byte(b'('));
            }
        }
    }
}

impl Iterator for PrintIter<'_> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        loop {
            match self.stack.pop()? {
                Tok::Byte(b) => return Some(b),
                Tok::Node(id) => {
                    let node = self.nodes[id as usize];
                    self.expand_onto_stack(node);
                }
            }
        }
    }
}

fn leaf_byte(node: Node) -> u8 {
    match node.op {
        Op::EmptySet => b'E',
        Op::Epsilon => b'e',
        _ => node.sym,
    }
}

fn cmp_printed(nodes: &[Node], a: Node, b: Node) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    PrintIter::new(nodes, a).cmp(PrintIter::new(nodes, b))
}

/// For commutative operators, orders the operands so the printed form is least.
/// Printed forms are prefix-free, so comparing the operands decides it.
fn orient(nodes: &[Node], mut cand: Node) -> Node {
    if cand.op.is_commutative() && cand.left != cand.right {
        let l = nodes[cand.left as usize];
        let r = nodes[cand.right as usize];
        if cmp_printed(nodes, r, l) == Ordering::Less {
            std::mem::swap(&mut cand.left, &mut cand.right);
        }
    }
    cand
}

/// New footprints of the stratum under construction.
struct Pending {
    words: usize,
    store: Vec<u64>,
    cands: Vec<Node>,
    table: HashTable<u32>,
    precise_seen: bool,
}

impl Pending {
    fn new(words: usize) -> Self {
        Pending {
            words,
            store: Vec::new(),
            cands: Vec::new(),
            table: HashTable::new(),
            precise_seen: false,
        }
    }

    fn len(&self) -> usize {
        self.cands.len()
    }

    fn fp(&self, id: usize) -> &[u64] {
        &self.store[id * self.words..(id + 1) * self.words]
    }

    /// Offers an unoriented candidate with footprint `fp`.
    fn offer(&mut self, nodes: &[Node], fp: &[u64], hash: u64, cand: Node, precise: bool) {
        if self.precise_seen && !precise {
            // Once a precise footprint exists at this cost only precise ones matter.
            return;
        }
        let words = self.words;
        let store = &self.store;
        let found = self
            .table
            .find(hash, |&id| {
                &store[id as usize * words..(id as usize + 1) * words] == fp
            })
            .copied();
        match found {
            Some(id) => {
                let cand = orient(nodes, cand);
                let cur = &mut self.cands[id as usize];
                if cmp_printed(nodes, cand, *cur) == Ordering::Less {
                    *cur = cand;
                }
            }
            None => {
                let id = self.cands.len() as u32;
                self.store.extend_from_slice(fp);
                self.cands.push(orient(nodes, cand));
                let store = &self.store;
                self.table.insert_unique(hash, id, |&i| {
                    hash_words(&store[i as usize * words..(i as usize + 1) * words])
                });
                self.precise_seen |= precise;
            }
        }
    }
}

/// One block of candidate generation for a stratum.
#[derive(Clone, Debug)]
enum Task {
    Unary {
        op: Op,
        src: Range<u32>,
    },
    Binary {
        op: Op,
        left: Range<u32>,
        right: Range<u32>,
        same: bool,
    },
}

/// Bottom-up search state for one instance.
pub struct Search<'a> {
    inst: &'a Instance,
    layout: FootprintLayout,
    words: usize,
    store: Vec<u64>,
    nodes: Vec<Node>,
    costs: Vec<u64>,
    seen: HashTable<u32>,
    strata: BTreeMap<u64, Range<u32>>,
    caps: Caps,
    stats: SearchStats,
    cap_hit: Option<CapHit>,
}

impl<'a> Search<'a> {
    pub fn new(inst: &'a Instance, caps: Caps) -> Result<Self, SolveError> {
        inst.validate()?;
        if let Some(w) = inst
            .pn
            .pos
            .iter()
            .chain(&inst.pn.neg)
            .find(|w| w.len() > MAX_STRING_LEN)
        {
            return Err(SolveError::StringTooLong(w.clone()));
        }
        let layout = FootprintLayout::new(&inst.pn.pos, &inst.pn.neg);
        let words = layout.words();
        Ok(Search {
            inst,
            layout,
            words,
            store: Vec::new(),
            nodes: Vec::new(),
            costs: Vec::new(),
            seen: HashTable::new(),
            strata: BTreeMap::new(),
            caps,
            stats: SearchStats::default(),
            cap_hit: None,
        })
    }

    pub fn layout(&self) -> &FootprintLayout {
        &self.layout
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn cap_hit(&self) -> Option<CapHit> {
        self.cap_hit
    }

    /// `(cost, number of footprints)` for every non-empty stratum built so far.
    pub fn strata(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.strata.iter().map(|(&k, r)| (k, r.len()))
    }

    /// Every retained witness with its cost and footprint, cheapest first.
    pub fn retained(&self) -> impl Iterator<Item = (u64, Regex, Footprint)> + '_ {
        (0..self.nodes.len()).map(move |id| {
            (
                self.costs[id],
                self.to_regex(id as u32),
                Footprint(self.fp(id as u32).to_vec().into_boxed_slice()),
            )
        })
    }

    fn fp(&self, id: u32) -> &[u64] {
        let i = id as usize * self.words;
        &self.store[i..i + self.words]
    }

    fn to_regex(&self, id: u32) -> Regex {
        self.node_regex(self.nodes[id as usize])
    }

    fn node_regex(&self, n: Node) -> Regex {
        match n.op {
            Op::EmptySet => Regex::EmptySet,
            Op::Epsilon => Regex::Epsilon,
            Op::Literal => Regex::Literal(Symbol(n.sym)),
            op if op.is_unary() => Regex::unary(op, self.to_regex(n.left)),
            op => Regex::binary(op, self.to_regex(n.left), self.to_regex(n.right)),
        }
    }

    fn lookup_seen(&self, fp: &[u64], hash: u64) -> bool {
        let words = self.words;
        let store = &self.store;
        self.seen
            .find(hash, |&id| {
                &store[id as usize * words..(id as usize + 1) * words] == fp
            })
            .is_some()
    }

    /// Runs the search to completion or until a cap is hit.
    pub fn run(&mut self) -> Solution {
        let started = Instant::now();
        let deadline = self.caps.time_limit.map(|d| started + d);
        let fallback = super::fallback_regex(self.inst);
        let bound = fallback.cost(&self.inst.cf);
        let cf = self.inst.cf;

        let pool = if self.caps.workers > 1 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.caps.workers)
                .build()
                .ok()
        } else {
            None
        };

        let mut k = cf.atom;
        while k <= bound {
            let mut pending = Pending::new(self.words);
            if k == cf.atom {
                self.leaves(&mut pending);
            } else {
                let tasks = self.tasks(k);
                if tasks.is_empty() {
                    k += 1;
                    continue;
                }
                let ok = match &pool {
                    Some(pool) => self.run_parallel(pool, &tasks, &mut pending, deadline),
                    None => self.run_sequential(&tasks, &mut pending, deadline),
                };
                if !ok {
                    return self.degrade(fallback, bound, &pending);
                }
            }
            if let Some(sol) = self.commit(k, pending) {
                return sol;
            }
            if self.seen.len() > self.caps.max_footprints {
                self.cap_hit = Some(CapHit::Footprints);
                return self.degrade(fallback, bound, &Pending::new(self.words));
            }
            k += 1;
        }
        // Unreachable in practice: the fallback's own footprint is reached by cost `bound`.
        Solution {
            regex: fallback,
            cost: bound,
            minimal: true,
        }
    }

    fn degrade(&self, fallback: Regex, bound: u64, pending: &Pending) -> Solution {
        let best = (0..pending.len())
            .filter(|&i| self.layout.is_precise(pending.fp(i)))
            .map(|i| pending.cands[i])
            .min_by(|a, b| cmp_printed(&self.nodes, *a, *b))
            .map(|n| self.node_regex(n));
        match best {
            Some(regex) => {
                let cost = regex.cost(&self.inst.cf);
                Solution {
                    regex,
                    cost,
                    minimal: false,
                }
            }
            None => Solution {
                regex: fallback,
                cost: bound,
                minimal: false,
            },
        }
    }

    fn leaves(&self, pending: &mut Pending) {
        let ops = self.inst.ops;
        let mut buf = vec![0u64; self.words];
        let mut leaves = Vec::new();
        if ops.contains(Op::EmptySet) {
            leaves.push((Op::EmptySet, 0u8));
        }
        if ops.contains(Op::Epsilon) {
            leaves.push((Op::Epsilon, 0));
        }
        if ops.contains(Op::Literal) {
            for s in self.inst.alphabet.symbols() {
                leaves.push((Op::Literal, s.0));
            }
        }
        for (op, sym) in leaves {
            self.layout.leaf_into(op, Some(Symbol(sym)), &mut buf);
            let hash = hash_words(&buf);
            let precise = self.layout.is_precise(&buf);
            let node = Node {
                op,
                sym,
                left: NONE,
                right: NONE,
            };
            pending.offer(&self.nodes, &buf, hash, node, precise);
        }
    }

    /// Candidate-generation blocks for stratum `k`, split for load balancing.
    fn tasks(&self, k: u64) -> Vec<Task> {
        const BLOCK: u32 = 512;
        let cf = self.inst.cf;
        let mut tasks = Vec::new();
        for op in Op::UNARY {
            if !self.inst.ops.contains(op) {
                continue;
            }
            let Some(src_cost) = k.checked_sub(cf.of(op)) else {
                continue;
            };
            if let Some(src) = self.strata.get(&src_cost) {
                for start in src.clone().step_by(BLOCK as usize) {
                    let end = (start + BLOCK).min(src.end);
                    tasks.push(Task::Unary {
                        op,
                        src: start..end,
                    });
                }
            }
        }
        for op in Op::BINARY {
            if !self.inst.ops.contains(op) {
                continue;
            }
            let Some(rest) = k.checked_sub(cf.of(op)) else {
                continue;
            };
            for (&k1, left) in &self.strata {
                let Some(k2) = rest.checked_sub(k1) else {
                    break;
                };
                if op.is_commutative() && k1 > k2 {
                    break;
                }
                let Some(right) = self.strata.get(&k2) else {
                    continue;
                };
                let same = k1 == k2 && op.is_commutative();
                for start in left.clone().step_by(BLOCK as usize) {
                    let end = (start + BLOCK).min(left.end);
                    tasks.push(Task::Binary {
                        op,
                        left: start..end,
                        right: right.clone(),
                        same,
                    });
                }
            }
        }
        tasks
    }

    /// Processes one block. Returns the number of candidates generated.
    fn process(&self, task: &Task, pending: &mut Pending, buf: &mut [u64]) -> u64 {
        let mut count = 0;
        match task {
            Task::Unary { op, src } => {
                for id in src.clone() {
                    self.layout.combine_into(*op, self.fp(id), self.fp(id), buf);
                    self.consider(
                        pending,
                        buf,
                        Node {
                            op: *op,
                            sym: 0,
                            left: id,
                            right: NONE,
                        },
                    );
                    count += 1;
                }
            }
            Task::Binary {
                op,
                left,
                right,
                same,
            } => {
                for l in left.clone() {
                    let a = self.fp(l);
                    let start = if *same { l } else { right.start };
                    for r in start..right.end {
                        self.layout.combine_into(*op, a, self.fp(r), buf);
                        self.consider(
                            pending,
                            buf,
                            Node {
                                op: *op,
                                sym: 0,
                                left: l,
                                right: r,
                            },
                        );
                    }
                    count += (right.end - start) as u64;
                }
            }
        }
        count
    }

    #[inline]
    fn consider(&self, pending: &mut Pending, fp: &[u64], cand: Node) {
        let hash = hash_words(fp);
        if self.lookup_seen(fp, hash) {
            return;
        }
        let precise = self.layout.is_precise(fp);
        pending.offer(&self.nodes, fp, hash, cand, precise);
    }

    fn over_cap(&self, pending: usize, deadline: Option<Instant>) -> Option<CapHit> {
        if self.seen.len() + pending > self.caps.max_footprints {
            return Some(CapHit::Footprints);
        }
        if matches!(deadline, Some(d) if Instant::now() >= d) {
            return Some(CapHit::Time);
        }
        None
    }

    fn run_sequential(
        &mut self,
        tasks: &[Task],
        pending: &mut Pending,
        deadline: Option<Instant>,
    ) -> bool {
        let mut buf = vec![0u64; self.words];
        for task in tasks {
            self.stats.candidates += self.process(task, pending, &mut buf);
            if let Some(hit) = self.over_cap(pending.len(), deadline) {
                self.cap_hit = Some(hit);
                return false;
            }
        }
        true
    }

    fn run_parallel(
        &mut self,
        pool: &rayon::ThreadPool,
        tasks: &[Task],
        pending: &mut Pending,
        deadline: Option<Instant>,
    ) -> bool {
        use rayon::prelude::*;
        // Batches bound the memory held in per-task buffers between merges.
        let batch = self.caps.workers * 4;
        for chunk in tasks.chunks(batch) {
            let this = &*self;
            let locals: Vec<(Pending, u64)> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|task| {
                        let mut local = Pending::new(this.words);
                        let mut buf = vec![0u64; this.words];
                        let n = this.process(task, &mut local, &mut buf);
                        (local, n)
                    })
                    .collect()
            });
            for (local, n) in locals {
                self.stats.candidates += n;
                for (i, cand) in local.cands.iter().enumerate() {
                    let fp = local.fp(i);
                    let precise = self.layout.is_precise(fp);
                    pending.offer(&self.nodes, fp, hash_words(fp), *cand, precise);
                }
            }
            if let Some(hit) = self.over_cap(pending.len(), deadline) {
                self.cap_hit = Some(hit);
                return false;
            }
        }
        true
    }

    /// Appends the finished stratum `k`. Returns the solution if it holds a
    /// precise footprint.
    fn commit(&mut self, k: u64, pending: Pending) -> Option<Solution> {
        let n = pending.len();
        if n == 0 {
            return None;
        }
        if pending.precise_seen {
            let best = (0..n)
                .filter(|&i| self.layout.is_precise(pending.fp(i)))
                .map(|i| pending.cands[i])
                .min_by(|a, b| cmp_printed(&self.nodes, *a, *b))
                .expect("precise footprint recorded");
            let regex = self.node_regex(best);
            debug_assert_eq!(regex.cost(&self.inst.cf), k);
            return Some(Solution {
                regex,
                cost: k,
                minimal: true,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| pending.fp(a).cmp(pending.fp(b)));
        let start = self.nodes.len() as u32;
        self.store.reserve(n * self.words);
        for i in order {
            let id = self.nodes.len() as u32;
            let fp = pending.fp(i);
            self.store.extend_from_slice(fp);
            self.nodes.push(pending.cands[i]);
            self.costs.push(k);
            let words = self.words;
            let store = &self.store;
            self.seen.insert_unique(hash_words(fp), id, |&j| {
                hash_words(&store[j as usize * words..(j as usize + 1) * words])
            });
        }
        self.strata.insert(k, start..self.nodes.len() as u32);
        self.stats.retained = self.nodes.len();
        self.stats.strata = self.strata.len();
        None
    }
}
