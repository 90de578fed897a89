//! Pattern representation of `cover(π)`.
//!
//! For each position `i`, the graphs that `π` makes smaller *first* at `i`
//! satisfy `x_{map[j]} = x_j` for `j < i`, `x_{map[i]} = 0` and `x_i = 1`.
//! Solving those equations with a union-find over positions yields a template
//! of constants and shared variables; the non-contradictory templates of a
//! permutation partition its cover.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph, GraphId, MAX_ORDER};
use crate::perm::{Permutation, PositionMap};

/// Default cap on instances produced by [`Pattern::instances`].
pub const DEFAULT_INSTANCE_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    /// A variable, named by the smallest position in its class.
    Var(u8),
}

/// Union-find over positions `1..=m` where every class may carry a constant.
#[derive(Clone)]
struct Unifier {
    parent: Vec<u8>,
    binding: Vec<Option<bool>>,
}

impl Unifier {
    fn new(m: usize) -> Self {
        Unifier {
            parent: (0..=m as u8).collect(),
            binding: vec![None; m + 1],
        }
    }

    fn find(&mut self, mut p: usize) -> usize {
        while self.parent[p] as usize != p {
            let grand = self.parent[self.parent[p] as usize];
            self.parent[p] = grand;
            p = grand as usize;
        }
        p
    }

    /// Returns `false` when the classes carry different constants.
    fn unify(&mut self, p: usize, q: usize) -> bool {
        let (a, b) = (self.find(p), self.find(q));
        if a == b {
            return true;
        }
        let (root, child) = if a < b { (a, b) } else { (b, a) };
        self.parent[child] = root as u8;
        match (self.binding[root], self.binding[child]) {
            (Some(x), Some(y)) if x != y => false,
            (None, Some(y)) => {
                self.binding[root] = Some(y);
                true
            }
            _ => true,
        }
    }

    fn bind(&mut self, p: usize, value: bool) -> bool {
        let r = self.find(p);
        match self.binding[r] {
            Some(v) => v == value,
            None => {
                self.binding[r] = Some(value);
                true
            }
        }
    }

    fn cells(&mut self) -> Vec<Cell> {
        let m = self.parent.len() - 1;
        (1..=m)
            .map(|p| {
                let r = self.find(p);
                match self.binding[r] {
                    Some(false) => Cell::Zero,
                    Some(true) => Cell::One,
                    None => Cell::Var(r as u8),
                }
            })
            .collect()
    }
}

/// A length-`m` template over `{0, 1, x_k}` denoting a set of graphs.
#[derive(Clone)]
pub struct Pattern {
    order: u8,
    cells: Vec<Cell>,
    first_diff: Option<u8>,
    ones: u64,
    zeros: u64,
    links: Vec<u64>,
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.cells == other.cells
    }
}

impl Eq for Pattern {}

impl Hash for Pattern {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.order.hash(state);
        self.cells.hash(state);
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{self}⟩")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.cells.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match c {
                Cell::Zero => f.write_str("0")?,
                Cell::One => f.write_str("1")?,
                Cell::Var(r) => write!(f, "x{r}")?,
            }
        }
        Ok(())
    }
}

fn order_for_length(m: usize) -> Option<usize> {
    (1..=MAX_ORDER).find(|&n| pair_count(n) == m)
}

impl Pattern {
    /// Builds a pattern from cells, normalising variable names to the smallest
    /// position of each class.
    pub fn from_cells(cells: Vec<Cell>, first_diff: Option<usize>) -> Result<Self> {
        let m = cells.len();
        let order = order_for_length(m)
            .ok_or_else(|| Error::Parse(format!("pattern length {m} is not n(n-1)/2")))?;
        let mut uf = Unifier::new(m);
        let mut first_of = std::collections::HashMap::new();
        for (k, c) in cells.iter().enumerate() {
            let p = k + 1;
            match *c {
                Cell::Zero => {
                    uf.bind(p, false);
                }
                Cell::One => {
                    uf.bind(p, true);
                }
                Cell::Var(v) => {
                    let first = *first_of.entry(v).or_insert(p);
                    uf.unify(first, p);
                }
            }
        }
        Ok(Pattern::compile(order, uf.cells(), first_diff))
    }

    fn compile(order: usize, cells: Vec<Cell>, first_diff: Option<usize>) -> Self {
        let m = cells.len();
        let shift = |p: usize| 1u64 << (m - p);
        let mut ones = 0;
        let mut zeros = 0;
        let mut classes: Vec<(u8, u64, u32)> = Vec::new();
        for (k, c) in cells.iter().enumerate() {
            let p = k + 1;
            match *c {
                Cell::Zero => zeros |= shift(p),
                Cell::One => ones |= shift(p),
                Cell::Var(r) => match classes.iter_mut().find(|(rep, _, _)| *rep == r) {
                    Some(entry) => {
                        entry.1 |= shift(p);
                        entry.2 += 1;
                    }
                    None => classes.push((r, shift(p), 1)),
                },
            }
        }
        let links = classes
            .into_iter()
            .filter(|&(_, _, size)| size > 1)
            .map(|(_, mask, _)| mask)
            .collect();
        Pattern {
            order: order as u8,
            cells,
            first_diff: first_diff.map(|i| i as u8),
            ones,
            zeros,
            links,
        }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cell at 1-based position `p`.
    pub fn cell(&self, p: usize) -> Cell {
        self.cells[p - 1]
    }

    /// The position at which instances become smaller, when known.
    pub fn first_diff(&self) -> Option<usize> {
        self.first_diff.map(|i| i as usize)
    }

    /// Variable classes as `(representative, members)`, by representative.
    pub fn classes(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for (k, c) in self.cells.iter().enumerate() {
            if let Cell::Var(r) = *c {
                match out.iter_mut().find(|(rep, _)| *rep == r as usize) {
                    Some((_, members)) => members.push(k + 1),
                    None => out.push((r as usize, vec![k + 1])),
                }
            }
        }
        out.sort_by_key(|(r, _)| *r);
        out
    }

    pub fn class_count(&self) -> usize {
        let mut reps: Vec<u8> = self
            .cells
            .iter()
            .filter_map(|c| match c {
                Cell::Var(r) => Some(*r),
                _ => None,
            })
            .collect();
        reps.sort_unstable();
        reps.dedup();
        reps.len()
    }

    /// Whether every graph of this order is an instance.
    pub fn is_universal(&self) -> bool {
        self.ones == 0 && self.zeros == 0 && self.links.is_empty()
    }

    /// Number of graphs described: `2^(number of variable classes)`.
    pub fn instance_count(&self) -> u64 {
        1u64 << self.class_count()
    }

    /// Constants agree with `g` and every class is constant-valued in `g`.
    #[inline]
    pub fn matches(&self, g: Graph) -> bool {
        debug_assert_eq!(g.order(), self.order());
        let w = g.word();
        w & self.ones == self.ones
            && w & self.zeros == 0
            && self.links.iter().all(|&c| {
                let v = w & c;
                v == 0 || v == c
            })
    }

    /// Length of the longest suffix made of singleton-class variables; every
    /// completion of such a suffix keeps an instance an instance.
    pub fn free_suffix_len(&self) -> usize {
        let classes = self.classes();
        let singleton = |r: u8| {
            classes
                .iter()
                .find(|(rep, _)| *rep == r as usize)
                .is_some_and(|(_, members)| members.len() == 1)
        };
        self.cells
            .iter()
            .rev()
            .take_while(|c| matches!(c, Cell::Var(r) if singleton(*r)))
            .count()
    }

    /// Every instance in ascending [`GraphId`] order.
    pub fn instances(&self, budget: u64) -> Result<Instances> {
        let count = self.instance_count();
        if count > budget {
            return Err(Error::BudgetExceeded {
                needed: count as u128,
                budget: budget as u128,
            });
        }
        let id_bit = |p: usize| 1u64 << (p - 1);
        let base = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::One)
            .fold(0, |acc, (k, _)| acc | id_bit(k + 1));
        // Ordering classes by their highest position makes the binary counter
        // monotone in the id.
        let mut classes: Vec<(usize, u64)> = self
            .classes()
            .into_iter()
            .map(|(_, members)| {
                let top = *members.iter().max().unwrap();
                (top, members.iter().fold(0, |acc, &p| acc | id_bit(p)))
            })
            .collect();
        classes.sort_by_key(|&(top, _)| top);
        Ok(Instances {
            order: self.order(),
            base,
            masks: classes.into_iter().map(|(_, mask)| mask).collect(),
            next: 0,
            end: count,
        })
    }
}

impl serde::Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Parses the comma-separated text form, e.g. `x1,1,0,x4,x5,x6`.
    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .trim()
            .trim_start_matches('⟨')
            .trim_end_matches('⟩')
            .split(',')
            .map(|t| match t.trim() {
                "0" => Ok(Cell::Zero),
                "1" => Ok(Cell::One),
                v => v
                    .strip_prefix('x')
                    .and_then(|k| k.parse::<u8>().ok())
                    .filter(|&k| k > 0)
                    .map(Cell::Var)
                    .ok_or_else(|| Error::Parse(format!("bad pattern cell {v:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::from_cells(cells, None)
    }
}

/// Iterator over the instances of a pattern.
pub struct Instances {
    order: usize,
    base: u64,
    masks: Vec<u64>,
    next: u64,
    end: u64,
}

impl Iterator for Instances {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        if self.next >= self.end {
            return None;
        }
        let counter = self.next;
        self.next += 1;
        let id = self
            .masks
            .iter()
            .enumerate()
            .filter(|(k, _)| counter >> k & 1 == 1)
            .fold(self.base, |acc, (_, m)| acc | m);
        Some(Graph::from_id(self.order, GraphId(id)).expect("instance within range"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// `pat_i(π)`, or `None` when the equations are contradictory.
pub fn pattern_at(pi: &Permutation, i: usize) -> Option<Pattern> {
    let map = pi.position_map();
    let m = map.len();
    assert!(i >= 1 && i <= m, "position {i} out of range 1..={m}");
    let mut uf = Unifier::new(m);
    for j in 1..i {
        uf.unify(map.get(j), j);
    }
    if uf.bind(map.get(i), false) && uf.bind(i, true) {
        Some(Pattern::compile(pi.degree(), uf.cells(), Some(i)))
    } else {
        None
    }
}

fn patterns_from_map(map: &PositionMap) -> Vec<Pattern> {
    let m = map.len();
    let mut uf = Unifier::new(m);
    let mut out = Vec::new();
    for i in 1..=m {
        let q = map.get(i);
        if uf.find(q) != uf.find(i) {
            let mut trial = uf.clone();
            if trial.bind(q, false) && trial.bind(i, true) {
                out.push(Pattern::compile(map.degree(), trial.cells(), Some(i)));
            }
        }
        uf.unify(q, i);
    }
    out
}

/// A list of patterns, optionally tied to the permutation that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    source: Option<Permutation>,
    patterns: Vec<Pattern>,
}

impl PatternSet {
    /// `pats(π)` in ascending first-difference order. Empty for the identity.
    pub fn of(pi: &Permutation) -> Self {
        PatternSet {
            source: Some(pi.clone()),
            patterns: patterns_from_map(&pi.position_map()),
        }
    }

    /// Union of several sets with structural duplicates removed.
    pub fn merged<'a>(sets: impl IntoIterator<Item = &'a PatternSet>) -> Self {
        let mut seen = HashSet::new();
        let mut patterns = Vec::new();
        for set in sets {
            for p in &set.patterns {
                if seen.insert(p.clone()) {
                    patterns.push(p.clone());
                }
            }
        }
        PatternSet {
            source: None,
            patterns,
        }
    }

    pub fn from_patterns(patterns: Vec<Pattern>) -> Self {
        PatternSet {
            source: None,
            patterns,
        }
    }

    pub fn source(&self) -> Option<&Permutation> {
        self.source.as_ref()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pattern> {
        self.patterns.iter()
    }

    pub fn covers(&self, g: Graph) -> bool {
        self.patterns.iter().any(|p| p.matches(g))
    }

    /// Sum of instance counts; the cover size for a single-permutation set.
    pub fn instance_total(&self) -> u64 {
        self.patterns.iter().map(Pattern::instance_count).sum()
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a Pattern;
    type IntoIter = std::slice::Iter<'a, Pattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

pub fn covered_by_set(sets: &[PatternSet], g: Graph) -> bool {
    sets.iter().any(|s| s.covers(g))
}

/// A permutation together with its position map and patterns.
#[derive(Clone, Debug)]
pub struct CompiledPerm {
    pub perm: Permutation,
    pub map: PositionMap,
    pub patterns: PatternSet,
}

impl CompiledPerm {
    pub fn new(perm: Permutation) -> Self {
        let map = perm.position_map();
        let patterns = PatternSet {
            source: Some(perm.clone()),
            patterns: patterns_from_map(&map),
        };
        CompiledPerm {
            perm,
            map,
            patterns,
        }
    }

    /// `π(g) < g`.
    #[inline]
    pub fn covers(&self, g: Graph) -> bool {
        self.map.makes_smaller(g)
    }

    pub fn cover_size(&self) -> u64 {
        self.patterns.instance_total()
    }
}

pub fn compile_all(perms: &[Permutation]) -> Vec<CompiledPerm> {
    perms.iter().cloned().map(CompiledPerm::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_graphs, apply_perm};
    use crate::perm::all_permutations;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn ids(it: impl IntoIterator<Item = Graph>) -> Vec<u64> {
        it.into_iter().map(|g| g.id().0).collect()
    }

    const COVER_1243: [u64; 24] = [
        2, 3, 8, 9, 10, 11, 14, 15, 18, 19, 26, 27, 34, 35, 40, 41, 42, 43, 46, 47, 50, 51, 58, 59,
    ];

    #[test]
    fn patterns_of_a_swap() {
        let pi = perm("[1,2,4,3]");
        assert!(pattern_at(&pi, 1).is_none());
        assert_eq!(pattern_at(&pi, 2).unwrap().to_string(), "x1,1,0,x4,x5,x6");
        assert_eq!(pattern_at(&pi, 4).unwrap().to_string(), "x1,x2,x2,1,0,x6");
        for i in [3, 5, 6] {
            assert!(pattern_at(&pi, i).is_none());
        }
        let set = PatternSet::of(&pi);
        assert_eq!(set.len(), 2);
        assert_eq!(set.patterns()[0].first_diff(), Some(2));
        assert_eq!(set.patterns()[1].first_diff(), Some(4));
        assert_eq!(set.patterns()[0], pattern_at(&pi, 2).unwrap());
    }

    #[test]
    fn identity_has_no_patterns() {
        for n in 2..=6 {
            assert!(PatternSet::of(&Permutation::identity(n)).is_empty());
        }
    }

    #[test]
    fn pattern_counts() {
        let a: Pattern = "x1,1,0,x4,x5,x6".parse().unwrap();
        let b: Pattern = "x1,x2,x2,1,0,x6".parse().unwrap();
        assert_eq!(a.instance_count(), 16);
        assert_eq!(b.instance_count(), 8);
        let c: Pattern = "0,1,1,0,0,1".parse().unwrap();
        assert_eq!(c.instance_count(), 1);
        assert_eq!(ids(c.instances(DEFAULT_INSTANCE_BUDGET).unwrap()).len(), 1);
        assert_eq!(PatternSet::of(&perm("[1,2,4,3]")).instance_total(), 24);
    }

    #[test]
    fn parse_normalises_names() {
        let p: Pattern = "x3,x3,1,0,x9,x9".parse().unwrap();
        assert_eq!(p.to_string(), "x1,x1,1,0,x5,x5");
        assert!("x1,2".parse::<Pattern>().is_err());
        assert!("x1,1,0".parse::<Pattern>().is_ok());
        assert!("x1,1".parse::<Pattern>().is_err());
    }

    #[test]
    fn matching() {
        let a: Pattern = "x1,1,0,x4,x5,x6".parse().unwrap();
        let b: Pattern = "x1,x2,x2,1,0,x6".parse().unwrap();
        let g2 = Graph::from_id(4, GraphId(2)).unwrap();
        assert_eq!(g2.vec_string(), "010000");
        assert!(a.matches(g2));
        assert!(!a.matches(Graph::empty(4)));
        assert!(!b.matches(Graph::from_vec_str(4, "010100").unwrap()));
        assert!(b.matches(Graph::from_vec_str(4, "011100").unwrap()));
    }

    #[test]
    fn instances_ascend_and_expand() {
        let a: Pattern = "x1,1,0,x4,x5,x6".parse().unwrap();
        let got = ids(a.instances(DEFAULT_INSTANCE_BUDGET).unwrap());
        assert_eq!(
            got,
            vec![2, 3, 10, 11, 18, 19, 26, 27, 34, 35, 42, 43, 50, 51, 58, 59]
        );
        let mut union: Vec<u64> = PatternSet::of(&perm("[1,2,4,3]"))
            .iter()
            .flat_map(|p| ids(p.instances(DEFAULT_INSTANCE_BUDGET).unwrap()))
            .collect();
        union.sort_unstable();
        assert_eq!(union, COVER_1243);
        assert!(matches!(
            a.instances(8),
            Err(Error::BudgetExceeded {
                needed: 16,
                budget: 8
            })
        ));
    }

    #[test]
    fn instances_ascend_with_linked_classes() {
        // class {1,6} outranks singleton {2} in id order
        let p: Pattern = "x1,x2,0,1,0,x1".parse().unwrap();
        let got = ids(p.instances(DEFAULT_INSTANCE_BUDGET).unwrap());
        assert!(got.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(got.len(), 4);
        for id in got {
            assert!(p.matches(Graph::from_id(4, GraphId(id)).unwrap()));
        }
    }

    #[test]
    fn free_suffix() {
        let p: Pattern = "x1,1,0,x4,x5,x6".parse().unwrap();
        assert_eq!(p.free_suffix_len(), 3);
        let q: Pattern = "x1,x2,x2,1,0,x6".parse().unwrap();
        assert_eq!(q.free_suffix_len(), 1);
        let r: Pattern = "x1,1,0,x4,x5,x1".parse().unwrap();
        assert_eq!(r.free_suffix_len(), 0);
    }

    #[test]
    fn merged_sets_deduplicate() {
        let a = PatternSet::of(&perm("[1,2,4,3]"));
        let merged = PatternSet::merged([&a, &a]);
        assert_eq!(merged.len(), 2);
        assert!(merged.source().is_none());
    }

    #[test]
    fn three_swaps_cover_all_noncanonical_order_four() {
        let sets: Vec<PatternSet> = ["[1,2,4,3]", "[1,3,2,4]", "[2,1,3,4]"]
            .iter()
            .map(|s| PatternSet::of(&perm(s)))
            .collect();
        let canonical = [0, 12, 30, 32, 44, 48, 52, 56, 60, 62, 63];
        for g in all_graphs(4) {
            assert_eq!(covered_by_set(&sets, g), !canonical.contains(&g.id().0));
        }
        assert!(!covered_by_set(&[], Graph::empty(4)));
    }

    /// Patterns are sound, complete and pairwise disjoint for every permutation
    /// of order at most five.
    #[test]
    fn patterns_partition_the_cover() {
        for n in 2..=5 {
            let graphs: Vec<Graph> = all_graphs(n).collect();
            for pi in all_permutations(n)
                .unwrap()
                .iter()
                .filter(|p| !p.is_identity())
            {
                let set = PatternSet::of(pi);
                let mut cover = 0u64;
                for &g in &graphs {
                    let smaller = apply_perm(pi, &g) < g;
                    let hits = set.iter().filter(|p| p.matches(g)).count();
                    assert!(hits <= 1, "{pi}: overlapping patterns at {g}");
                    assert_eq!(hits == 1, smaller, "{pi} at {g}");
                    cover += smaller as u64;
                }
                assert_eq!(set.instance_total(), cover);
                if n == 4 {
                    assert!((24..=30).contains(&cover), "{pi}: {cover}");
                }
                for p in set.iter() {
                    let i = p.first_diff().unwrap();
                    assert_eq!(p.cell(i), Cell::One);
                    assert_eq!(p.cell(pi.position_map().get(i)), Cell::Zero);
                    for (rep, members) in p.classes() {
                        assert_eq!(rep, members[0]);
                    }
                }
            }
        }
    }
}
