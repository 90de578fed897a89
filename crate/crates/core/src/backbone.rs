//! Backbone permutations: permutations that, modulo dominance, are the sole
//! coverer of some graph and so belong to an optimal cover.
//!
//! Two searches are provided. The graph sweep walks all graphs in lex order,
//! leaping over blocks that cannot contain new backbones. The SAT search
//! tests every candidate against the rest of a universe.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dominance::{common_order, get_dominated, DominanceSession};
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph, MAX_ORDER};
use crate::pattern::{CompiledPerm, Pattern, PatternSet};
use crate::perm::{all_permutations, Permutation, PositionMap};
use crate::sat::{Encoder, Lit};

/// Default bound on covering permutations before a graph counts as "many".
pub const DEFAULT_BOUND: usize = 10;

/// Largest order for which covering permutations are found by scanning `S_n`.
pub const SCAN_ORDER_LIMIT: usize = 8;

/// Default cap on the leap taken past a graph with many coverers: blocks of
/// at most `2^4` graphs.
pub const DEFAULT_MANY_LEAP_LIMIT: usize = 4;

/// Witness pool size used inside the sweep, where refinements are small.
const SWEEP_POOL_LIMIT: usize = 1 << 11;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverers {
    /// All covering permutations, fewer than the bound.
    Few(Vec<Permutation>),
    /// At least the bound many.
    Many,
}

/// The non-identity permutations of one order with their position maps.
pub struct PermTable {
    order: usize,
    perms: Vec<Permutation>,
    maps: Vec<PositionMap>,
}

impl PermTable {
    pub fn new(order: usize) -> Result<Self> {
        if order > SCAN_ORDER_LIMIT {
            return Err(Error::OrderTooLarge {
                order,
                limit: SCAN_ORDER_LIMIT,
                what: "covering-permutation scan",
            });
        }
        let perms: Vec<Permutation> = all_permutations(order)?
            .into_iter()
            .filter(|p| !p.is_identity())
            .collect();
        let maps = perms.iter().map(Permutation::position_map).collect();
        Ok(PermTable { order, perms, maps })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Covering permutations of `g`, or `Many` once `bound` are found.
    pub fn covering(&self, g: Graph, bound: Option<usize>) -> Coverers {
        let limit = bound.unwrap_or(usize::MAX);
        let mut found = Vec::new();
        for (k, map) in self.maps.iter().enumerate() {
            if map.makes_smaller(g) {
                if found.len() + 1 >= limit {
                    return Coverers::Many;
                }
                found.push(self.perms[k].clone());
            }
        }
        Coverers::Few(found)
    }

    pub fn is_canonical(&self, g: Graph) -> bool {
        !self.maps.iter().any(|m| m.makes_smaller(g))
    }

    pub fn has_at_least(&self, g: Graph, bound: usize) -> bool {
        let mut count = 0;
        for map in &self.maps {
            if map.makes_smaller(g) {
                count += 1;
                if count >= bound {
                    return true;
                }
            }
        }
        bound == 0
    }
}

/// `{π ∈ S_n \ {id} : π(g) < g}`, truncated to `Many` at `bound`.
pub fn covering_perms(g: Graph, bound: Option<usize>) -> Result<Coverers> {
    Ok(PermTable::new(g.order())?.covering(g, bound))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackboneStatus {
    Backbone(Permutation),
    Canonical,
    /// Every coverer is dominated modulo `β`.
    Covered,
    Many,
    Ambiguous(Vec<Permutation>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub visited: u64,
    pub skipped: u64,
    pub leap_covered: u64,
    pub leap_canonical: u64,
    pub leap_many: u64,
    pub canonical: u64,
    pub covered: u64,
    pub many: u64,
    pub ambiguous: u64,
    pub backbones: u64,
    pub rescanned: u64,
    pub missed_backbones: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub bound: usize,
    /// Re-examine every skipped block by brute force and count backbones that
    /// a leap jumped over.
    pub debug_rescan: bool,
    /// Largest block `2^k` skipped when a graph has many coverers; 0
    /// disables that leap.
    pub many_leap_limit: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            bound: DEFAULT_BOUND,
            debug_rescan: false,
            many_leap_limit: DEFAULT_MANY_LEAP_LIMIT,
        }
    }
}

/// State of the graph sweep: the backbones found so far and their patterns.
pub struct BackboneState {
    table: PermTable,
    session: DominanceSession,
    beta: Vec<CompiledPerm>,
    beta_patterns: Vec<Pattern>,
    seen_patterns: HashSet<Pattern>,
    options: SweepOptions,
    stats: SweepStats,
}

impl BackboneState {
    pub fn new(order: usize, options: SweepOptions) -> Result<Self> {
        if options.bound == 0 {
            return Err(Error::Usage("bound must be at least 1".into()));
        }
        let mut session = DominanceSession::new(order);
        session.set_pool_limit(SWEEP_POOL_LIMIT);
        Ok(BackboneState {
            table: PermTable::new(order)?,
            session,
            beta: Vec::new(),
            beta_patterns: Vec::new(),
            seen_patterns: HashSet::new(),
            options,
            stats: SweepStats::default(),
        })
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    pub fn bound(&self) -> usize {
        self.options.bound
    }

    pub fn stats(&self) -> SweepStats {
        self.stats
    }

    /// `β` in discovery order.
    pub fn beta(&self) -> Vec<Permutation> {
        self.beta.iter().map(|c| c.perm.clone()).collect()
    }

    pub fn beta_patterns(&self) -> PatternSet {
        PatternSet::from_patterns(self.beta_patterns.clone())
    }

    pub fn add_backbone(&mut self, pi: &Permutation) -> Result<()> {
        if self.beta.iter().any(|c| &c.perm == pi) {
            return Ok(());
        }
        self.session.add_base(pi)?;
        let compiled = CompiledPerm::new(pi.clone());
        for p in &compiled.patterns {
            if self.seen_patterns.insert(p.clone()) {
                self.beta_patterns.push(p.clone());
            }
        }
        self.beta.push(compiled);
        Ok(())
    }

    fn covering_beta_pattern(&self, g: Graph) -> Option<&Pattern> {
        self.beta_patterns.iter().find(|p| p.matches(g))
    }

    /// Status of a graph not covered by `β`.
    pub fn status(&mut self, g: Graph) -> Result<BackboneStatus> {
        match self.table.covering(g, Some(self.options.bound)) {
            Coverers::Many => Ok(BackboneStatus::Many),
            Coverers::Few(s) if s.is_empty() => Ok(BackboneStatus::Canonical),
            Coverers::Few(mut s) if s.len() == 1 => Ok(BackboneStatus::Backbone(s.remove(0))),
            Coverers::Few(s) => {
                let mut refined = self.session.refine(&s)?;
                Ok(match refined.len() {
                    0 => BackboneStatus::Covered,
                    1 => BackboneStatus::Backbone(refined.remove(0)),
                    _ => BackboneStatus::Ambiguous(refined),
                })
            }
        }
    }

    /// Whether every single flip of the `k` trailing zeros of `g` satisfies
    /// `test`.
    fn flips_all(&self, g: Graph, k: usize, test: impl Fn(&PermTable, Graph) -> bool) -> bool {
        (0..k).all(|bit| {
            test(
                &self.table,
                Graph::from_word(g.order(), g.word() | 1 << bit),
            )
        })
    }

    fn rescan(&mut self, from: u64, to: u64) -> Result<()> {
        let n = self.order();
        for w in from..to {
            let g = Graph::from_word(n, w);
            self.stats.rescanned += 1;
            if self.beta.iter().any(|c| c.covers(g)) {
                continue;
            }
            if let BackboneStatus::Backbone(_) = self.status(g)? {
                self.stats.missed_backbones += 1;
            }
        }
        Ok(())
    }

    /// Runs the sweep over all graphs of the order; `progress` is called
    /// every 2^16 visited graphs.
    pub fn sweep(&mut self, mut progress: impl FnMut(&SweepStats, usize)) -> Result<()> {
        let n = self.order();
        let m = pair_count(n);
        let end: u64 = 1 << m;
        let mut w: u64 = 0;
        while w < end {
            let g = Graph::from_word(n, w);
            self.stats.visited += 1;
            if self.stats.visited.is_multiple_of(1 << 16) {
                progress(&self.stats, self.beta.len());
            }
            if let Some(p) = self.covering_beta_pattern(g) {
                let k = p.free_suffix_len();
                let next = ((w >> k) + 1) << k;
                if k > 0 {
                    self.stats.leap_covered += 1;
                    self.stats.skipped += next - w - 1;
                    if self.options.debug_rescan {
                        for v in w + 1..next {
                            self.stats.rescanned += 1;
                            let h = Graph::from_word(n, v);
                            if !self.beta.iter().any(|c| c.covers(h)) {
                                self.stats.missed_backbones += 1;
                            }
                        }
                    }
                }
                w = next;
                continue;
            }
            let k = (w.trailing_zeros() as usize).min(m);
            let mut next = w + 1;
            match self.status(g)? {
                BackboneStatus::Backbone(pi) => {
                    self.stats.backbones += 1;
                    self.add_backbone(&pi)?;
                }
                BackboneStatus::Canonical => {
                    self.stats.canonical += 1;
                    if k > 0 && self.flips_all(g, k, |t, h| t.is_canonical(h)) {
                        self.stats.leap_canonical += 1;
                        next = w + (1 << k);
                    }
                }
                BackboneStatus::Many => {
                    self.stats.many += 1;
                    let bound = self.options.bound;
                    let k = k.min(self.options.many_leap_limit);
                    if k > 0 && self.flips_all(g, k, |t, h| t.has_at_least(h, bound)) {
                        self.stats.leap_many += 1;
                        next = w + (1 << k);
                    }
                }
                BackboneStatus::Covered => self.stats.covered += 1,
                BackboneStatus::Ambiguous(_) => self.stats.ambiguous += 1,
            }
            if next > w + 1 {
                self.stats.skipped += next - w - 1;
                if self.options.debug_rescan {
                    self.rescan(w + 1, next)?;
                }
            }
            w = next;
        }
        progress(&self.stats, self.beta.len());
        Ok(())
    }
}

/// Backbones found by sweeping all graphs of order `n`.
pub fn find_backbones_iterative(n: usize, bound: usize) -> Result<BackboneState> {
    let mut state = BackboneState::new(
        n,
        SweepOptions {
            bound,
            ..SweepOptions::default()
        },
    )?;
    state.sweep(|_, _| {})?;
    Ok(state)
}

/// Whether some graph is covered by `pi` and by no other member of
/// `universe`.
pub fn is_backbone_sat(pi: &Permutation, universe: &[Permutation]) -> Result<bool> {
    let rest: Vec<Permutation> = universe.iter().filter(|p| *p != pi).cloned().collect();
    Ok(get_dominated(&rest, std::slice::from_ref(pi))?.is_empty())
}

/// Every backbone of `universe`. Candidates dominated by `seed` are
/// discarded first; the rest are tested one by one.
pub fn find_backbones_sat(
    universe: &[Permutation],
    seed: &[Permutation],
) -> Result<Vec<Permutation>> {
    backbones_among(universe, &[], seed)
}

/// Members of `candidates` that are backbones of `candidates ∪ fixed`.
/// Members of `fixed` are taken as already chosen and are not tested.
pub fn backbones_among(
    candidates: &[Permutation],
    fixed: &[Permutation],
    seed: &[Permutation],
) -> Result<Vec<Permutation>> {
    let Some(order) = common_order(candidates.iter().chain(fixed).chain(seed))? else {
        return Ok(Vec::new());
    };
    let seed_set: HashSet<&Permutation> = seed.iter().collect();
    let outside: Vec<Permutation> = candidates
        .iter()
        .filter(|p| !seed_set.contains(p))
        .cloned()
        .collect();
    let pruned: HashSet<Permutation> = if seed.is_empty() {
        HashSet::new()
    } else {
        get_dominated(seed, &outside)?.into_iter().collect()
    };
    let survivors: Vec<usize> = (0..candidates.len())
        .filter(|&k| !pruned.contains(&candidates[k]))
        .collect();

    let compiled: Vec<CompiledPerm> = candidates
        .par_iter()
        .cloned()
        .map(CompiledPerm::new)
        .collect();
    let fixed_sets: Vec<PatternSet> = fixed.iter().map(PatternSet::of).collect();
    let workers = rayon::current_num_threads().max(1);
    let chunk = survivors.len().div_ceil(workers).max(1);
    let results: Vec<Result<Vec<usize>>> = survivors
        .par_chunks(chunk)
        .map(|part| {
            let mut oracle = BackboneOracle::new(order, &compiled, &fixed_sets)?;
            let mut found = Vec::new();
            for &k in part {
                if oracle.is_sole_coverer(k)? {
                    found.push(k);
                }
            }
            Ok(found)
        })
        .collect();
    let mut found = Vec::new();
    for r in results {
        found.extend(r?);
    }
    found.sort_unstable();
    Ok(found.into_iter().map(|k| candidates[k].clone()).collect())
}

/// One solver holding `notCovered` of every candidate under its own
/// selector, with the fixed permutations' clauses permanent.
struct BackboneOracle<'a> {
    enc: Encoder,
    perms: &'a [CompiledPerm],
    selectors: Vec<Lit>,
}

impl<'a> BackboneOracle<'a> {
    fn new(order: usize, perms: &'a [CompiledPerm], fixed: &[PatternSet]) -> Result<Self> {
        let mut enc = Encoder::new(order);
        for set in fixed {
            enc.add_not_covered_set(set)?;
        }
        let mut selectors = Vec::with_capacity(perms.len());
        for p in perms {
            let group = enc.new_group();
            for gamma in &p.patterns {
                enc.add_not_covered_to_group(group, gamma)?;
            }
            selectors.push(group.selector());
        }
        Ok(BackboneOracle {
            enc,
            perms,
            selectors,
        })
    }

    fn is_sole_coverer(&mut self, k: usize) -> Result<bool> {
        let mut assumptions: Vec<Lit> = self
            .selectors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &s)| s)
            .collect();
        let guard = assumptions.len();
        for gamma in &self.perms[k].patterns {
            assumptions.truncate(guard);
            assumptions.extend(self.enc.covered_lits(gamma)?);
            if self.enc.solve(&assumptions) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Order bound shared by callers that sweep permutations.
pub fn check_scan_order(n: usize) -> Result<()> {
    if n < 2 || n > SCAN_ORDER_LIMIT.min(MAX_ORDER) {
        return Err(Error::OrderTooLarge {
            order: n,
            limit: SCAN_ORDER_LIMIT,
            what: "backbone search",
        });
    }
    Ok(())
}
