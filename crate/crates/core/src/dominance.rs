//! Dominance between permutations: `Π` dominates `π` when
//! `cover(π) ⊆ cover(Π)`, and `π₁` dominates `π₂` modulo `β` when
//! `β ∪ {π₁}` dominates `π₂`.
//!
//! A candidate is dominated iff, for each of its patterns `γ`,
//! `notCovered(pats(Π)) ∪ covered(γ)` is unsatisfiable. Satisfying models
//! are witness graphs, which also rule out every other candidate covering
//! them without another solver call.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pattern::{CompiledPerm, PatternSet};
use crate::perm::Permutation;
use crate::sat::{Encoder, Lit};

/// Upper bound on the number of witness graphs a session keeps.
pub const WITNESS_POOL_LIMIT: usize = 1 << 15;

pub(crate) fn common_order<'a>(
    sets: impl IntoIterator<Item = &'a Permutation>,
) -> Result<Option<usize>> {
    let mut order = None;
    for p in sets {
        match order {
            None => order = Some(p.degree()),
            Some(n) if n != p.degree() => {
                return Err(Error::OrderMismatch {
                    left: n,
                    right: p.degree(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(order)
}

/// A graph covered by one of `patterns` but violating every loaded
/// `notCovered` clause active under `guard`, if any.
fn uncovered_instance(
    enc: &mut Encoder,
    patterns: &PatternSet,
    guard: &[Lit],
    sat_calls: &mut u64,
) -> Result<Option<Graph>> {
    let mut assumptions = Vec::with_capacity(guard.len() + enc.order() * enc.order());
    for gamma in patterns {
        assumptions.clear();
        assumptions.extend_from_slice(guard);
        assumptions.extend(enc.covered_lits(gamma)?);
        *sat_calls += 1;
        if enc.solve(&assumptions) {
            return Ok(Some(enc.model_graph()));
        }
    }
    Ok(None)
}

/// Every candidate whose cover is contained in the cover of `dominators`,
/// in candidate order. The identity, having an empty cover, counts as
/// dominated.
pub fn get_dominated(
    dominators: &[Permutation],
    candidates: &[Permutation],
) -> Result<Vec<Permutation>> {
    let Some(order) = common_order(dominators.iter().chain(candidates))? else {
        return Ok(Vec::new());
    };
    let mut enc = Encoder::new(order);
    for d in dominators {
        enc.add_not_covered_set(&PatternSet::of(d))?;
    }
    let mut witnesses: Vec<Graph> = Vec::new();
    let mut sat_calls = 0;
    let mut dominated = Vec::new();
    for c in candidates {
        let compiled = CompiledPerm::new(c.clone());
        if witnesses.iter().any(|&w| compiled.covers(w)) {
            continue;
        }
        match uncovered_instance(&mut enc, &compiled.patterns, &[], &mut sat_calls)? {
            Some(w) => witnesses.push(w),
            None => dominated.push(c.clone()),
        }
    }
    Ok(dominated)
}

/// `refine(S, β)`: drops members of `S` dominated modulo `β` by another
/// remaining member, picking in ascending permutation order.
pub fn refine(s: &[Permutation], beta: &[Permutation]) -> Result<Vec<Permutation>> {
    let Some(order) = common_order(s.iter().chain(beta))? else {
        return Ok(Vec::new());
    };
    DominanceSession::with_base(order, beta)?.refine(s)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DominanceStats {
    pub sat_calls: u64,
    pub witness_prunes: u64,
    pub witnesses: u64,
}

/// An incremental solver holding `notCovered(pats(β))` permanently, plus a
/// pool of witness graphs outside `cover(β)`, reused across refinements.
pub struct DominanceSession {
    order: usize,
    enc: Encoder,
    base: Vec<CompiledPerm>,
    base_set: HashSet<Permutation>,
    witnesses: Vec<Graph>,
    pool_limit: usize,
    stats: DominanceStats,
}

impl DominanceSession {
    pub fn new(order: usize) -> Self {
        DominanceSession {
            order,
            enc: Encoder::new(order),
            base: Vec::new(),
            base_set: HashSet::new(),
            witnesses: Vec::new(),
            pool_limit: WITNESS_POOL_LIMIT,
            stats: DominanceStats::default(),
        }
    }

    /// Caps the witness pool; a smaller pool is cheaper to re-index when
    /// many small refinements run back to back.
    pub fn set_pool_limit(&mut self, limit: usize) {
        self.pool_limit = limit;
        self.witnesses.truncate(limit);
    }

    pub fn with_base(order: usize, beta: &[Permutation]) -> Result<Self> {
        let mut session = DominanceSession::new(order);
        for b in beta {
            session.add_base(b)?;
        }
        Ok(session)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stats(&self) -> DominanceStats {
        self.stats
    }

    pub fn base(&self) -> impl Iterator<Item = &Permutation> {
        self.base.iter().map(|c| &c.perm)
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn base_covers(&self, g: Graph) -> bool {
        self.base.iter().any(|c| c.covers(g))
    }

    /// Adds `pi` to `β`; a no-op if already present.
    pub fn add_base(&mut self, pi: &Permutation) -> Result<()> {
        if pi.degree() != self.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: pi.degree(),
            });
        }
        if !self.base_set.insert(pi.clone()) {
            return Ok(());
        }
        let compiled = CompiledPerm::new(pi.clone());
        self.enc.add_not_covered_set(&compiled.patterns)?;
        self.witnesses.retain(|&w| !compiled.covers(w));
        self.base.push(compiled);
        Ok(())
    }

    /// Offers graphs to the witness pool; those covered by `β` are ignored.
    pub fn add_witnesses(&mut self, graphs: impl IntoIterator<Item = Graph>) {
        for g in graphs {
            if self.witnesses.len() >= self.pool_limit {
                break;
            }
            if !self.base_covers(g) {
                self.witnesses.push(g);
            }
        }
    }

    /// Refinement of `s` modulo the session's `β`.
    pub fn refine(&mut self, s: &[Permutation]) -> Result<Vec<Permutation>> {
        let mut perms: Vec<Permutation> = s
            .iter()
            .filter(|p| !self.base_set.contains(*p))
            .cloned()
            .collect();
        if let Some(bad) = perms.iter().find(|p| p.degree() != self.order) {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: bad.degree(),
            });
        }
        perms.sort();
        perms.dedup();
        let perms: Vec<CompiledPerm> = perms.into_par_iter().map(CompiledPerm::new).collect();
        let k = perms.len();
        let pool = &self.witnesses;
        let mut cov: Vec<BitSet> = perms
            .par_iter()
            .map(|c| {
                let mut bits = BitSet::new(pool.len());
                for (i, &w) in pool.iter().enumerate() {
                    if c.covers(w) {
                        bits.insert(i);
                    }
                }
                bits
            })
            .collect();
        let mut alive = vec![true; k];
        let mut index = KeyIndex::build(&cov, &alive, self.witnesses.len());

        for pick in 0..k {
            if !alive[pick] {
                continue;
            }
            if self.witnesses.len() >= 2 * index.built_at + 256 {
                index = KeyIndex::build(&cov, &alive, self.witnesses.len());
            }
            let eligible = index.eligible(&cov[pick]);
            let mut group = None;
            let mut dominated = Vec::new();
            for c in eligible {
                if c == pick || !alive[c] {
                    continue;
                }
                if !cov[c].is_subset(&cov[pick]) {
                    self.stats.witness_prunes += 1;
                    continue;
                }
                let selector = match group {
                    Some(g) => g,
                    None => {
                        let g = self.enc.new_group();
                        for gamma in &perms[pick].patterns {
                            self.enc.add_not_covered_to_group(g, gamma)?;
                        }
                        group = Some(g);
                        g
                    }
                };
                let found = uncovered_instance(
                    &mut self.enc,
                    &perms[c].patterns,
                    &[selector.selector()],
                    &mut self.stats.sat_calls,
                )?;
                match found {
                    Some(w) => {
                        self.stats.witnesses += 1;
                        if self.witnesses.len() < self.pool_limit {
                            self.witnesses.push(w);
                            let len = self.witnesses.len();
                            cov.par_iter_mut().zip(&perms).for_each(|(bits, p)| {
                                bits.grow(len);
                                if p.covers(w) {
                                    bits.insert(len - 1);
                                }
                            });
                        }
                    }
                    None => dominated.push(c),
                }
            }
            for c in dominated {
                alive[c] = false;
            }
            if let Some(g) = group {
                self.enc.retire(g);
            }
        }
        Ok(perms
            .into_iter()
            .zip(alive)
            .filter(|(_, a)| *a)
            .map(|(c, _)| c.perm)
            .collect())
    }
}

/// Buckets candidates by the witness they cover that the fewest others
/// cover. A candidate can only be dominated by a pick covering its key, so a
/// pick need only look at the buckets of its own witnesses.
struct KeyIndex {
    built_at: usize,
    buckets: Vec<Vec<usize>>,
    unkeyed: Vec<usize>,
}

impl KeyIndex {
    fn build(cov: &[BitSet], alive: &[bool], pool: usize) -> Self {
        let counts = cov
            .par_iter()
            .zip(alive)
            .filter(|(_, a)| **a)
            .fold(
                || vec![0u32; pool],
                |mut acc, (bits, _)| {
                    for w in bits.iter() {
                        acc[w] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u32; pool],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let keys: Vec<Option<usize>> = cov
            .par_iter()
            .map(|bits| bits.iter().min_by_key(|&w| (counts[w], w)))
            .collect();
        let mut index = KeyIndex {
            built_at: pool,
            buckets: vec![Vec::new(); pool],
            unkeyed: Vec::new(),
        };
        for (c, key) in keys.into_iter().enumerate() {
            if !alive[c] {
                continue;
            }
            match key {
                Some(w) => index.buckets[w].push(c),
                None => index.unkeyed.push(c),
            }
        }
        index
    }

    /// Candidates whose key lies in `pick_cov`, plus the unkeyed ones,
    /// ascending.
    fn eligible(&self, pick_cov: &BitSet) -> Vec<usize> {
        let mut out = self.unkeyed.clone();
        for w in pick_cov.iter().take_while(|&w| w < self.buckets.len()) {
            out.extend_from_slice(&self.buckets[w]);
        }
        out.sort_unstable();
        out
    }
}
