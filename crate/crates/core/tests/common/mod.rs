//! Brute-force oracles that use only graph accessors, never the position
//! maps or patterns under test.

#![allow(dead_code)]

pub mod suites;

use rand::seq::SliceRandom;
use rand::Rng;
use symcover::graph::pair_count;
use symcover::{all_permutations, Graph, Permutation};

pub fn vec_of(g: &Graph) -> Vec<bool> {
    let n = g.order();
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(g.has_edge(i, j));
        }
    }
    out
}

/// `π(G) < G`, with `π(G)(i, j) = G(π(i), π(j))`.
pub fn covers(pi: &Permutation, g: &Graph) -> bool {
    let n = g.order();
    let mut image = Vec::with_capacity(pair_count(n));
    for i in 1..=n {
        for j in i + 1..=n {
            image.push(g.has_edge(pi.apply(i), pi.apply(j)));
        }
    }
    image < vec_of(g)
}

pub fn graphs(n: usize) -> impl Iterator<Item = Graph> {
    (0..1u64 << pair_count(n)).map(move |w| Graph::from_word(n, w))
}

pub fn cover_set(perms: &[Permutation], n: usize) -> Vec<bool> {
    graphs(n)
        .map(|g| perms.iter().any(|p| covers(p, &g)))
        .collect()
}

pub fn nontrivial(n: usize) -> Vec<Permutation> {
    all_permutations(n)
        .unwrap()
        .into_iter()
        .filter(|p| !p.is_identity())
        .collect()
}

pub fn random_subset(rng: &mut impl Rng, n: usize, max: usize) -> Vec<Permutation> {
    let mut all = nontrivial(n);
    all.shuffle(rng);
    let k = rng.gen_range(1..=max.min(all.len()));
    all.truncate(k);
    all
}
