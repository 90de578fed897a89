//! Break artifacts: JSON break files, CNF encodings and brute-force checks.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dominance::common_order;
use crate::error::{Error, Result};
use crate::graph::{count_canonical_with_limit, pair_count, Graph, SWEEP_ORDER_LIMIT};
use crate::pattern::{compile_all, Pattern, PatternSet};
use crate::perm::Permutation;
use crate::sat::Encoder;

/// Largest order `verify_break` sweeps when long runs are allowed.
pub const LONG_SWEEP_ORDER_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakKind {
    Optimal,
    Partial,
    External,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: BreakKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backbones: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_nodes: Option<u64>,
}

impl Provenance {
    pub fn new(kind: BreakKind) -> Self {
        Provenance {
            kind,
            backbones: None,
            matrix_rows: None,
            matrix_cols: None,
            forced: None,
            search_nodes: None,
        }
    }
}

/// A set of lex-constraints `G ≤ π(G)` and the patterns whose negation
/// encodes them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakSpec {
    pub order: usize,
    pub permutations: Vec<Permutation>,
    pub patterns: Vec<Pattern>,
    pub provenance: Provenance,
}

impl BreakSpec {
    pub fn from_permutations(
        order: usize,
        permutations: Vec<Permutation>,
        provenance: Provenance,
    ) -> Result<Self> {
        if let Some(n) = common_order(&permutations)? {
            if n != order {
                return Err(Error::OrderMismatch {
                    left: order,
                    right: n,
                });
            }
        }
        let sets: Vec<PatternSet> = permutations.iter().map(PatternSet::of).collect();
        let patterns = PatternSet::merged(&sets).patterns().to_vec();
        Ok(BreakSpec {
            order,
            permutations,
            patterns,
            provenance,
        })
    }

    pub fn pattern_set(&self) -> PatternSet {
        PatternSet::from_patterns(self.patterns.clone())
    }

    /// Pretty JSON with a trailing newline; key order is fixed.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BreakSpec = serde_json::from_str(text)?;
        let m = pair_count(spec.order);
        if let Some(p) = spec.patterns.iter().find(|p| p.len() != m) {
            return Err(Error::Parse(format!(
                "pattern {p} has length {} but order {} needs {m}",
                p.len(),
                spec.order
            )));
        }
        if let Some(n) = common_order(&spec.permutations)? {
            if n != spec.order {
                return Err(Error::OrderMismatch {
                    left: spec.order,
                    right: n,
                });
            }
        }
        Ok(spec)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        BreakSpec::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfStats {
    pub variables: usize,
    pub clauses: usize,
    pub equality_variables: usize,
}

fn encode(spec: &BreakSpec) -> Result<Encoder> {
    let mut enc = Encoder::new(spec.order);
    for p in &spec.patterns {
        enc.add_not_covered(p)?;
    }
    Ok(enc)
}

/// Writes the break as DIMACS: one clause per pattern plus the definitions
/// of the equality variables it uses.
pub fn emit_cnf(spec: &BreakSpec, mut sink: impl Write) -> Result<CnfStats> {
    let enc = encode(spec)?;
    sink.write_all(enc.dimacs().as_bytes())?;
    Ok(cnf_stats(&enc, spec.order))
}

fn cnf_stats(enc: &Encoder, order: usize) -> CnfStats {
    let variables = enc.solver().num_vars();
    CnfStats {
        variables,
        clauses: enc.permanent_clause_count(),
        equality_variables: variables - pair_count(order),
    }
}

/// Size of the CNF [`emit_cnf`] would write.
pub fn cnf_size(spec: &BreakSpec) -> Result<CnfStats> {
    Ok(cnf_stats(&encode(spec)?, spec.order))
}

/// Number of graphs matching none of the break's patterns. Sweeps all
/// `2^m` graphs, so orders above 7 need `allow_long`.
pub fn verify_break(spec: &BreakSpec, allow_long: bool) -> Result<u64> {
    let limit = if allow_long {
        LONG_SWEEP_ORDER_LIMIT
    } else {
        SWEEP_ORDER_LIMIT
    };
    if spec.order == 0 || spec.order > limit {
        return Err(Error::OrderTooLarge {
            order: spec.order,
            limit,
            what: "break verification",
        });
    }
    let n = spec.order;
    let total = 1u64 << pair_count(n);
    let patterns = &spec.patterns;
    Ok((0..total)
        .into_par_iter()
        .filter(|&w| {
            let g = Graph::from_word(n, w);
            !patterns.iter().any(|p| p.matches(g))
        })
        .count() as u64)
}

/// Graphs not covered by `perms`, per isomorphism class. 1 exactly for a
/// complete break.
pub fn redundancy_ratio(perms: &[Permutation], n: usize) -> Result<f64> {
    if let Some(d) = common_order(perms)? {
        if d != n {
            return Err(Error::OrderMismatch { left: n, right: d });
        }
    }
    let classes = count_canonical_with_limit(n, SWEEP_ORDER_LIMIT)?;
    let compiled = compile_all(perms);
    let total = 1u64 << pair_count(n);
    let uncovered = (0..total)
        .into_par_iter()
        .filter(|&w| {
            let g = Graph::from_word(n, w);
            !compiled.iter().any(|c| c.covers(g))
        })
        .count();
    Ok(uncovered as f64 / classes as f64)
}
