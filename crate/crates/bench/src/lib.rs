//! Fixtures shared by the kernel benchmarks.

use symcover::{all_permutations, Permutation};

/// Every non-identity permutation of degree `n`.
pub fn nontrivial_perms(n: usize) -> Vec<Permutation> {
    all_permutations(n)
        .expect("degree within range")
        .into_iter()
        .filter(|p| !p.is_identity())
        .collect()
}
