//! The explicit set-cover view: rows are permutations, columns are the
//! graphs they cover, and a minimum row set covering every column is an
//! optimal break.

mod reduce;
mod solve;

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

pub use solve::SearchStats;

use crate::bitset::BitSet;
use crate::dominance::common_order;
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph, GraphId};
use crate::pattern::{compile_all, CompiledPerm, DEFAULT_INSTANCE_BUDGET};
use crate::perm::Permutation;
use crate::sat::Encoder;
use reduce::Work;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMatrix {
    order: usize,
    rows: Vec<Permutation>,
    cols: Vec<GraphId>,
    bits: Vec<BitSet>,
    forced: Vec<Permutation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSolution {
    /// Forced rows first, then the rows chosen by search.
    pub chosen: Vec<Permutation>,
    pub forced_count: usize,
    pub optimal: bool,
    pub stats: SearchStats,
}

/// How the columns of a matrix are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnSource {
    /// Sweep all `2^m` graphs.
    Sweep,
    /// Expand the patterns of the rows.
    Patterns,
    /// Enumerate models of a SAT encoding.
    Sat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Largest number of graphs or pattern instances expanded explicitly.
    pub budget: u64,
    /// Forces a particular column source instead of the cheapest one.
    pub source: Option<ColumnSource>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            budget: DEFAULT_INSTANCE_BUDGET,
            source: None,
        }
    }
}

impl CoverMatrix {
    /// A matrix from explicit incidence rows; `bits[r]` is over column indices.
    pub fn new(
        order: usize,
        rows: Vec<Permutation>,
        cols: Vec<GraphId>,
        bits: Vec<BitSet>,
        forced: Vec<Permutation>,
    ) -> Result<Self> {
        if rows.len() != bits.len() {
            return Err(Error::Parse(format!(
                "{} row labels for {} rows",
                rows.len(),
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|b| b.len() != cols.len()) {
            return Err(Error::Parse(format!(
                "row of width {} in a matrix with {} columns",
                b.len(),
                cols.len()
            )));
        }
        Ok(CoverMatrix {
            order,
            rows,
            cols,
            bits,
            forced,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> &[Permutation] {
        &self.rows
    }

    pub fn cols(&self) -> &[GraphId] {
        &self.cols
    }

    pub fn row_bits(&self, r: usize) -> &BitSet {
        &self.bits[r]
    }

    pub fn forced(&self) -> &[Permutation] {
        &self.forced
    }

    /// No rows and no columns.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.cols.is_empty()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.bits.iter().map(BitSet::count).collect()
    }

    pub fn col_supports(&self) -> Vec<usize> {
        let mut support = vec![0; self.cols.len()];
        for b in &self.bits {
            for c in b.iter() {
                support[c] += 1;
            }
        }
        support
    }

    /// Smallest and largest row weight, if there are rows.
    pub fn weight_range(&self) -> Option<(usize, usize)> {
        let w = self.row_weights();
        Some((*w.iter().min()?, *w.iter().max()?))
    }

    fn work(&self) -> Work {
        Work::new(&self.bits, self.cols.len())
    }

    fn restrict(&self, w: &Work, extra_forced: &[usize]) -> CoverMatrix {
        let keep_cols: Vec<usize> = w.col_alive.iter().collect();
        let keep_rows: Vec<usize> = w.row_alive.iter().collect();
        let mut forced = self.forced.clone();
        forced.extend(extra_forced.iter().map(|&r| self.rows[r].clone()));
        CoverMatrix {
            order: self.order,
            rows: keep_rows.iter().map(|&r| self.rows[r].clone()).collect(),
            cols: keep_cols.iter().map(|&c| self.cols[c]).collect(),
            bits: keep_rows
                .iter()
                .map(|&r| self.bits[r].select(&keep_cols))
                .collect(),
            forced,
        }
    }

    /// Fixpoint of row dominance, column dominance and essential rows.
    pub fn reduce(&self) -> CoverMatrix {
        let mut w = self.work();
        let forced = w.reduce();
        self.restrict(&w, &forced)
    }

    /// Minimum-cardinality cover of all columns, including forced rows.
    pub fn solve_exact(&self) -> Result<CoverSolution> {
        let mut w = self.work();
        if w.infeasible() {
            return Err(Error::Usage("matrix has an uncoverable column".into()));
        }
        let top = w.reduce();
        let (rest, stats) = solve::minimum_cover(w);
        let mut chosen = self.forced.clone();
        chosen.extend(top.iter().map(|&r| self.rows[r].clone()));
        let forced_count = chosen.len();
        chosen.extend(rest.iter().map(|&r| self.rows[r].clone()));
        Ok(CoverSolution {
            chosen,
            forced_count,
            optimal: true,
            stats,
        })
    }

    /// Pseudo-Boolean optimisation text: minimise the chosen rows subject to
    /// every column being covered.
    pub fn write_opb(&self, mut out: impl Write) -> Result<()> {
        let nrows = self.rows.len();
        writeln!(
            out,
            "* #variable= {} #constraint= {}",
            nrows,
            self.cols.len()
        )?;
        for (k, p) in self.rows.iter().enumerate() {
            writeln!(out, "* x{} = {}", k + 1, p)?;
        }
        let mut objective = String::from("min:");
        for k in 0..nrows {
            let _ = write!(objective, " +1 x{}", k + 1);
        }
        writeln!(out, "{objective} ;")?;
        let mut covering: Vec<Vec<usize>> = vec![Vec::new(); self.cols.len()];
        for (r, b) in self.bits.iter().enumerate() {
            for c in b.iter() {
                covering[c].push(r);
            }
        }
        for rows in covering {
            let mut line = String::new();
            for r in rows {
                let _ = write!(line, "+1 x{} ", r + 1);
            }
            writeln!(out, "{line}>= 1;")?;
        }
        Ok(())
    }

    /// Plain-text dump: `rows cols`, one bitstring per row, then row, column
    /// and forced labels.
    pub fn write_dump(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{} {}", self.rows.len(), self.cols.len())?;
        for b in &self.bits {
            let line: String = (0..self.cols.len())
                .map(|c| if b.contains(c) { '1' } else { '0' })
                .collect();
            writeln!(out, "{line}")?;
        }
        writeln!(out, "n {}", self.order)?;
        for (k, p) in self.rows.iter().enumerate() {
            writeln!(out, "r {k} {p}")?;
        }
        for (k, id) in self.cols.iter().enumerate() {
            writeln!(out, "c {k} {id}")?;
        }
        for p in &self.forced {
            writeln!(out, "f {p}")?;
        }
        Ok(())
    }

    pub fn read_dump(input: impl BufRead) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("matrix dump: {what}"));
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_>>()?;
        let [nrows, ncols] = dims[..] else {
            return Err(bad("header must be `rows cols`"));
        };
        let mut bits = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            let line = lines.next().ok_or_else(|| bad("missing row"))??;
            let line = line.trim();
            if line.len() != ncols {
                return Err(bad("row length differs from column count"));
            }
            let mut b = BitSet::new(ncols);
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '1' => b.insert(c),
                    '0' => {}
                    _ => return Err(bad("rows must be 0/1 strings")),
                }
            }
            bits.push(b);
        }
        let mut order = None;
        let mut rows = vec![None; nrows];
        let mut cols = vec![None; ncols];
        let mut forced = Vec::new();
        for line in lines {
            let line = line?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                None => continue,
                Some("n") => {
                    order = Some(
                        parts
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| bad("bad order"))?,
                    )
                }
                Some("r") => {
                    let k: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad row index"))?;
                    let p: Permutation = parts
                        .next()
                        .ok_or_else(|| bad("missing row label"))?
                        .parse()?;
                    *rows
                        .get_mut(k)
                        .ok_or_else(|| bad("row index out of range"))? = Some(p);
                }
                Some("c") => {
                    let k: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad column index"))?;
                    let id: u64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("bad column label"))?;
                    *cols
                        .get_mut(k)
                        .ok_or_else(|| bad("column index out of range"))? = Some(GraphId(id));
                }
                Some("f") => forced.push(
                    parts
                        .next()
                        .ok_or_else(|| bad("missing forced label"))?
                        .parse()?,
                ),
                Some(other) => return Err(bad(&format!("unknown line tag {other:?}"))),
            }
        }
        let rows: Vec<Permutation> = rows
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| bad("missing row label"))?;
        let cols: Vec<GraphId> = cols
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| bad("missing column label"))?;
        let order = match order {
            Some(n) => n,
            None => rows
                .first()
                .or(forced.first())
                .map(Permutation::degree)
                .ok_or_else(|| bad("cannot infer order"))?,
        };
        CoverMatrix::new(order, rows, cols, bits, forced)
    }
}

/// The matrix with rows `rows` and columns `cover(rows) \ cover(beta)`,
/// columns ascending by id. Rows covering no column are dropped.
pub fn build_matrix(
    rows: &[Permutation],
    beta: &[Permutation],
    options: BuildOptions,
) -> Result<CoverMatrix> {
    let Some(order) = common_order(rows.iter().chain(beta))? else {
        return Ok(CoverMatrix {
            order: 0,
            rows: Vec::new(),
            cols: Vec::new(),
            bits: Vec::new(),
            forced: Vec::new(),
        });
    };
    let compiled_rows = compile_all(rows);
    let compiled_beta = compile_all(beta);
    let m = pair_count(order);
    let instance_total: u64 = compiled_rows.iter().map(CompiledPerm::cover_size).sum();
    let source = options.source.unwrap_or(if 1u64 << m <= options.budget {
        ColumnSource::Sweep
    } else if instance_total <= options.budget {
        ColumnSource::Patterns
    } else {
        ColumnSource::Sat
    });
    let outside_beta = |g: Graph| !compiled_beta.iter().any(|b| b.covers(g));
    let mut graphs: Vec<Graph> = match source {
        ColumnSource::Sweep => {
            if 1u64 << m > options.budget {
                return Err(Error::BudgetExceeded {
                    needed: 1u128 << m,
                    budget: options.budget as u128,
                });
            }
            (0..1u64 << m)
                .into_par_iter()
                .map(|w| Graph::from_word(order, w))
                .filter(|&g| outside_beta(g) && compiled_rows.iter().any(|r| r.covers(g)))
                .collect()
        }
        ColumnSource::Patterns => {
            if instance_total > options.budget {
                return Err(Error::BudgetExceeded {
                    needed: instance_total as u128,
                    budget: options.budget as u128,
                });
            }
            let mut all = Vec::new();
            for r in &compiled_rows {
                for p in &r.patterns {
                    all.extend(p.instances(options.budget)?.filter(|&g| outside_beta(g)));
                }
            }
            all
        }
        ColumnSource::Sat => sat_columns(order, &compiled_rows, &compiled_beta)?,
    };
    graphs.sort_unstable_by_key(|g| g.id());
    graphs.dedup();

    let bits: Vec<BitSet> = compiled_rows
        .par_iter()
        .map(|r| {
            let mut b = BitSet::new(graphs.len());
            for (c, &g) in graphs.iter().enumerate() {
                if r.covers(g) {
                    b.insert(c);
                }
            }
            b
        })
        .collect();
    let (rows, bits): (Vec<Permutation>, Vec<BitSet>) = rows
        .iter()
        .cloned()
        .zip(bits)
        .filter(|(_, b)| !b.is_empty())
        .unzip();
    Ok(CoverMatrix {
        order,
        rows,
        cols: graphs.iter().map(Graph::id).collect(),
        bits,
        forced: Vec::new(),
    })
}

/// Graphs covered by some row but by no member of `beta`, as SAT models.
fn sat_columns(order: usize, rows: &[CompiledPerm], beta: &[CompiledPerm]) -> Result<Vec<Graph>> {
    let mut enc = Encoder::new(order);
    for b in beta {
        enc.add_not_covered_set(&b.patterns)?;
    }
    let mut any = Vec::new();
    for r in rows {
        for p in &r.patterns {
            any.push(enc.activator(p)?);
        }
    }
    if any.is_empty() {
        return Ok(Vec::new());
    }
    let group = enc.new_group();
    enc.add_to_group(group, &any);
    let graphs = enc.models(&[group.selector()]).collect();
    enc.retire(group);
    Ok(graphs)
}
