//! Minimum-cardinality complete symmetry breaks for simple graphs.
//!
//! A permutation `π` *covers* a graph `G` when `π(G)` is lexicographically
//! smaller than `G`. A set of permutations whose lex-constraints `G ≤ π(G)`
//! admit exactly the canonical graphs is a set cover of the non-canonical
//! graphs, and a minimum such cover is an optimal lex-leader break.
//!
//! The crate computes those covers without materialising the full
//! `n! × 2^m` incidence matrix:
//!
//! * [`pattern`] describes `cover(π)` concisely through unification patterns,
//! * [`sat`] encodes pattern (non-)coverage into CNF for an incremental solver,
//! * [`dominance`] and [`backbone`] prune permutations symbolically,
//! * [`setcover`] builds, reduces and solves the residual explicit matrix,
//! * [`emit`] writes and verifies the resulting break,
//! * [`pipeline`] ties the phases together.

pub mod backbone;
pub mod bitset;
pub mod dominance;
pub mod emit;
pub mod error;
pub mod graph;
pub mod pattern;
pub mod perm;
pub mod pipeline;
pub mod sat;
pub mod setcover;

pub use backbone::{BackboneState, BackboneStatus, Coverers, SweepStats};
pub use emit::{BreakSpec, Provenance};
pub use error::{Error, Result};
pub use graph::{count_canonical, Graph, GraphId};
pub use pattern::{Cell, Pattern, PatternSet};
pub use perm::{all_permutations, transpositions, Permutation, PositionMap};
pub use pipeline::{run_pipeline, PipelineConfig, RunReport};
pub use setcover::{CoverMatrix, CoverSolution};
