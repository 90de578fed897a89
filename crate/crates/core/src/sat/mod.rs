//! SAT layer: a CDCL solver and the pattern encodings built on it.

mod encode;
mod solver;

pub use encode::{Encoder, GroupId, Models};
pub use solver::{Lit, Solver, SolverStats, Var};
