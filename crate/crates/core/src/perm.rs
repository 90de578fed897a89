//! Vertex permutations and the maps they induce on vec positions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{pair_at, pair_count, position, Graph, MAX_ORDER};

/// A permutation of `{1..n}` in one-line notation: `image[i-1] = π(i)`.
///
/// The derived order is lexicographic on the image, which is also the
/// enumeration order of [`all_permutations`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 || n > MAX_ORDER {
            return Err(Error::InvalidPermutation(format!("degree {n} unsupported")));
        }
        let mut seen = vec![false; n + 1];
        for &v in &image {
            if v == 0 || v > n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{image:?} is not a bijection"
                )));
            }
        }
        Ok(Permutation {
            image: image.into_iter().map(|v| v as u8).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (1..=n as u8).collect(),
        }
    }

    /// Swaps `i` and `j`, fixing everything else.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut p = Permutation::identity(n);
        p.image.swap(i - 1, j - 1);
        p
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    /// `π(i)` for 1-based `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] as usize
    }

    pub fn image(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(i, &v)| v as usize == i + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.degree()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize - 1] = i as u8 + 1;
        }
        Permutation { image: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`. Since graphs are acted on
    /// by relabelling, `apply_perm(σ, apply_perm(π, g)) == apply_perm(π.compose(σ), g)`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(self.degree(), other.degree());
        Permutation {
            image: other
                .image
                .iter()
                .map(|&v| self.image[v as usize - 1])
                .collect(),
        }
    }

    pub fn position_map(&self) -> PositionMap {
        let n = self.degree();
        let map = (1..=pair_count(n))
            .map(|p| {
                let (a, b) = pair_at(n, p);
                let (x, y) = (self.apply(a), self.apply(b));
                let (i, j) = if x < y { (x, y) } else { (y, x) };
                position(n, i, j) as u8
            })
            .collect();
        PositionMap::from_raw(n, map)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [..] permutation, got {s:?}")))?;
        let image = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(image)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.image.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let image = Vec::<usize>::deserialize(d)?;
        Permutation::new(image).map_err(serde::de::Error::custom)
    }
}

/// The bijection on vec positions induced by a permutation:
/// `vec(π(G))[p] == vec(G)[map[p]]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PositionMap {
    degree: u8,
    map: Vec<u8>,
    // (output shift, input shift) for positions that move, in position order.
    moves: Vec<(u8, u8)>,
}

impl PositionMap {
    fn from_raw(degree: usize, map: Vec<u8>) -> Self {
        let m = map.len();
        let moves = map
            .iter()
            .enumerate()
            .filter(|&(k, &q)| q as usize != k + 1)
            .map(|(k, &q)| ((m - (k + 1)) as u8, (m - q as usize) as u8))
            .collect();
        PositionMap {
            degree: degree as u8,
            map,
            moves,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `map[p]` for 1-based `p`.
    #[inline]
    pub fn get(&self, p: usize) -> usize {
        self.map[p - 1] as usize
    }

    pub fn as_vec(&self) -> Vec<usize> {
        self.map.iter().map(|&q| q as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    /// `p ↦ self[other[p]]`; equals `position_map(π ∘ σ)` for `self = map(π)`
    /// and `other = map(σ)`.
    pub fn then(&self, other: &PositionMap) -> PositionMap {
        let map = other
            .map
            .iter()
            .map(|&q| self.map[q as usize - 1])
            .collect();
        PositionMap::from_raw(self.degree(), map)
    }

    pub fn apply(&self, g: Graph) -> Graph {
        let w = g.word();
        let mut out = w;
        for &(dst, src) in &self.moves {
            let bit = (w >> src) & 1;
            out = (out & !(1u64 << dst)) | (bit << dst);
        }
        Graph::from_word(g.order(), out)
    }

    /// `π(G) < G`, deciding at the first position where the two differ.
    #[inline]
    pub fn makes_smaller(&self, g: Graph) -> bool {
        let w = g.word();
        for &(dst, src) in &self.moves {
            let a = (w >> src) & 1;
            let b = (w >> dst) & 1;
            if a != b {
                return a < b;
            }
        }
        false
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            limit: MAX_ORDER,
            what: "permutation enumeration",
        });
    }
    Ok(())
}

/// All of `S_n` in lexicographic order of images, identity first.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    check_degree(n)?;
    let mut current: Vec<u8> = (1..=n as u8).collect();
    let mut out = Vec::with_capacity((1..=n).product());
    loop {
        out.push(Permutation {
            image: current.clone(),
        });
        // next permutation in lex order
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(out)
}

/// The `n(n-1)/2` transpositions `(i j)`, `i < j`, ordered by `(i, j)`.
pub fn transpositions(n: usize) -> Vec<Permutation> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 1..n {
        for j in i + 1..=n {
            out.push(Permutation::transposition(n, i, j));
        }
    }
    out
}
