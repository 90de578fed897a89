//! Simple graphs as upper-triangle bit vectors.
//!
//! `vec(G)` lists the upper triangle of the adjacency matrix row by row:
//! `(1,2), (1,3), …, (1,n), (2,3), …, (n-1,n)`. Position 1 is the most
//! significant digit of the lexicographic order, so the graph is stored as a
//! machine word whose integer order coincides with that order: position `p`
//! lives at bit `m - p`.
//!
//! [`GraphId`] uses the opposite convention (position 1 is bit 0), which is how
//! graphs are named in decimal.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::{all_permutations, Permutation, PositionMap};

/// Largest supported order; `m = 45` still fits one word.
pub const MAX_ORDER: usize = 10;

/// Default limit for brute-force canonicity over `S_n`.
pub const BRUTE_FORCE_ORDER_LIMIT: usize = 8;

/// Default limit for sweeps over all `2^m` graphs.
pub const SWEEP_ORDER_LIMIT: usize = 7;

/// Number of vertex pairs, `n(n-1)/2`.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// 1-based vec position of the pair `(i, j)`, `1 ≤ i < j ≤ n`.
pub const fn position(n: usize, i: usize, j: usize) -> usize {
    (i - 1) * n + j - i * (i + 1) / 2
}

/// Inverse of [`position`].
pub fn pair_at(n: usize, p: usize) -> (usize, usize) {
    debug_assert!(p >= 1 && p <= pair_count(n));
    let mut start = 0;
    for i in 1..n {
        let row = n - i;
        if p <= start + row {
            return (i, i + (p - start));
        }
        start += row;
    }
    unreachable!("position {p} out of range for order {n}")
}

/// Decimal graph name: bit `k` is vec position `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphId(pub u64);

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    order: u8,
    word: u64,
}

impl Graph {
    pub fn empty(order: usize) -> Self {
        assert!(
            (1..=MAX_ORDER).contains(&order),
            "unsupported order {order}"
        );
        Graph {
            order: order as u8,
            word: 0,
        }
    }

    /// Builds a graph from its lex word (position `p` at bit `m - p`).
    pub fn from_word(order: usize, word: u64) -> Self {
        let g = Graph::empty(order);
        debug_assert!(g.m() == 64 || word >> g.m() == 0);
        Graph { word, ..g }
    }

    pub fn from_bits(order: usize, bits: &[bool]) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::OrderTooLarge {
                order,
                limit: MAX_ORDER,
                what: "graphs",
            });
        }
        let m = pair_count(order);
        if bits.len() != m {
            return Err(Error::InvalidGraph(format!(
                "order {order} needs {m} bits, got {}",
                bits.len()
            )));
        }
        let word = bits.iter().fold(0u64, |w, &b| (w << 1) | b as u64);
        Ok(Graph::from_word(order, word))
    }

    /// Parses a 0/1 string, position 1 leftmost.
    pub fn from_vec_str(order: usize, s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidGraph(format!("unexpected digit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Graph::from_bits(order, &bits)
    }

    pub fn from_id(order: usize, id: GraphId) -> Result<Self> {
        let m = pair_count(order);
        if m < 64 && id.0 >> m != 0 {
            return Err(Error::InvalidGraph(format!(
                "id {} out of range for order {order}",
                id.0
            )));
        }
        let g = Graph::empty(order);
        // lsb-first id -> msb-first word is a bit reversal over m bits.
        let word = if m == 0 {
            0
        } else {
            id.0.reverse_bits() >> (64 - m)
        };
        Ok(Graph { word, ..g })
    }

    pub fn id(&self) -> GraphId {
        let m = self.m();
        if m == 0 {
            GraphId(0)
        } else {
            GraphId(self.word.reverse_bits() >> (64 - m))
        }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn m(&self) -> usize {
        pair_count(self.order as usize)
    }

    pub fn word(&self) -> u64 {
        self.word
    }

    /// Value at 1-based vec position `p`.
    #[inline]
    pub fn bit(&self, p: usize) -> bool {
        (self.word >> (self.m() - p)) & 1 == 1
    }

    pub fn with_bit(&self, p: usize, value: bool) -> Graph {
        let mask = 1u64 << (self.m() - p);
        let word = if value {
            self.word | mask
        } else {
            self.word & !mask
        };
        Graph { word, ..*self }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a != b && self.bit(position(self.order(), a, b))
    }

    pub fn edge_count(&self) -> u32 {
        self.word.count_ones()
    }

    pub fn bits(&self) -> Vec<bool> {
        (1..=self.m()).map(|p| self.bit(p)).collect()
    }

    /// The 0/1 vec string, position 1 leftmost.
    pub fn vec_string(&self) -> String {
        (1..=self.m())
            .map(|p| if self.bit(p) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id(), self.vec_string())
    }
}

pub fn vec_compare(a: &Graph, b: &Graph) -> Result<Ordering> {
    if a.order != b.order {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    Ok(a.word.cmp(&b.word))
}

/// `π(G)`: the entry at `(i, j)` of the result is the entry at `(π(i), π(j))` of `g`.
pub fn apply_perm(pi: &Permutation, g: &Graph) -> Graph {
    assert_eq!(
        pi.degree(),
        g.order(),
        "permutation degree must equal graph order"
    );
    pi.position_map().apply(*g)
}

/// Next graph in ascending lex order, or `None` past the complete graph.
pub fn increment(g: &Graph) -> Option<Graph> {
    let m = g.m();
    let next = g.word + 1;
    if m < 64 && next >> m != 0 {
        None
    } else {
        Some(Graph { word: next, ..*g })
    }
}

/// All non-identity position maps of `S_n`, in enumeration order.
pub(crate) fn nontrivial_maps(n: usize) -> Result<Vec<PositionMap>> {
    Ok(all_permutations(n)?
        .iter()
        .filter(|p| !p.is_identity())
        .map(Permutation::position_map)
        .collect())
}

pub fn is_canonical_bruteforce(g: &Graph) -> Result<bool> {
    is_canonical_with_limit(g, BRUTE_FORCE_ORDER_LIMIT)
}

pub fn is_canonical_with_limit(g: &Graph, limit: usize) -> Result<bool> {
    if g.order() > limit {
        return Err(Error::OrderTooLarge {
            order: g.order(),
            limit,
            what: "brute-force canonicity",
        });
    }
    let maps = nontrivial_maps(g.order())?;
    Ok(!maps.iter().any(|pm| pm.makes_smaller(*g)))
}

/// Number of canonical graphs of order `n`, i.e. of isomorphism classes.
pub fn count_canonical(n: usize) -> Result<u64> {
    count_canonical_with_limit(n, SWEEP_ORDER_LIMIT)
}

pub fn count_canonical_with_limit(n: usize, limit: usize) -> Result<u64> {
    if n == 0 || n > limit {
        return Err(Error::OrderTooLarge {
            order: n,
            limit,
            what: "canonical graph counting",
        });
    }
    let maps = nontrivial_maps(n)?;
    let total = 1u64 << pair_count(n);
    Ok((0..total)
        .into_par_iter()
        .filter(|&w| {
            let g = Graph::from_word(n, w);
            !maps.iter().any(|pm| pm.makes_smaller(g))
        })
        .count() as u64)
}

/// Ids of all canonical graphs of order `n`, ascending by id.
pub fn canonical_ids(n: usize) -> Result<Vec<GraphId>> {
    if n == 0 || n > SWEEP_ORDER_LIMIT {
        return Err(Error::OrderTooLarge {
            order: n,
            limit: SWEEP_ORDER_LIMIT,
            what: "canonical graph listing",
        });
    }
    let maps = nontrivial_maps(n)?;
    let total = 1u64 << pair_count(n);
    let mut ids: Vec<GraphId> = (0..total)
        .into_par_iter()
        .map(|w| Graph::from_word(n, w))
        .filter(|g| !maps.iter().any(|pm| pm.makes_smaller(*g)))
        .map(|g| g.id())
        .collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Iterates every graph of order `n` in ascending lex order.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let total = 1u64 << pair_count(n);
    (0..total).map(move |w| Graph::from_word(n, w))
}
