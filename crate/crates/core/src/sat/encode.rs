//! CNF encodings of pattern coverage over the vec variables `x_1..x_m`.
//!
//! * `notCovered(γ)` is a single clause: some constant of `γ` is violated or
//!   some class member differs from its representative.
//! * `covered(γ)` is a set of implications from an activation literal, so it
//!   can be switched on per query through an assumption.
//!
//! Equality between two positions uses an auxiliary `e_pq ↔ (x_p ↔ x_q)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::solver::{Lit, Solver, Var};
use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::pattern::{Cell, Pattern, PatternSet};

/// Handle for a group of clauses that can be enabled and retired together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupId(Lit);

impl GroupId {
    pub fn selector(self) -> Lit {
        self.0
    }
}

pub struct Encoder {
    solver: Solver,
    order: usize,
    m: usize,
    eq_vars: HashMap<(u8, u8), Var>,
    activators: HashMap<Pattern, Lit>,
    permanent: Vec<Vec<Lit>>,
    retired_since_simplify: usize,
}

impl Encoder {
    pub fn new(order: usize) -> Self {
        let m = pair_count(order);
        let mut solver = Solver::new();
        for _ in 0..m {
            solver.new_var();
        }
        Encoder {
            solver,
            order,
            m,
            eq_vars: HashMap::new(),
            activators: HashMap::new(),
            permanent: Vec::new(),
            retired_since_simplify: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    /// Literal of `x_p` (edge present at 1-based position `p`).
    pub fn x(&self, p: usize) -> Lit {
        debug_assert!(p >= 1 && p <= self.m);
        Lit::new(var_at(p - 1), true)
    }

    fn add_permanent(&mut self, clause: Vec<Lit>) {
        self.solver.add_clause(&clause);
        self.permanent.push(clause);
    }

    /// `e_pq`, defined on first use.
    pub fn eq(&mut self, p: usize, q: usize) -> Result<Lit> {
        if p == q {
            return Err(Error::SamePosition(p));
        }
        let key = (p.min(q) as u8, p.max(q) as u8);
        if let Some(&v) = self.eq_vars.get(&key) {
            return Ok(v.positive());
        }
        let e = self.solver.new_var();
        let (xp, xq) = (self.x(p), self.x(q));
        self.add_permanent(vec![e.negative(), !xp, xq]);
        self.add_permanent(vec![e.negative(), xp, !xq]);
        self.add_permanent(vec![e.positive(), xp, xq]);
        self.add_permanent(vec![e.positive(), !xp, !xq]);
        self.eq_vars.insert(key, e);
        Ok(e.positive())
    }

    /// The clause stating that a graph is not an instance of `pattern`.
    pub fn not_covered_clause(&mut self, pattern: &Pattern) -> Result<Vec<Lit>> {
        let mut clause = Vec::new();
        for (k, cell) in pattern.cells().iter().enumerate() {
            let p = k + 1;
            match *cell {
                Cell::Zero => clause.push(self.x(p)),
                Cell::One => clause.push(!self.x(p)),
                Cell::Var(r) if r as usize != p => clause.push(!self.eq(r as usize, p)?),
                Cell::Var(_) => {}
            }
        }
        if clause.is_empty() {
            return Err(Error::UniversalPattern);
        }
        Ok(clause)
    }

    /// Literals whose conjunction says a graph is an instance of `pattern`,
    /// for use as assumptions.
    pub fn covered_lits(&mut self, pattern: &Pattern) -> Result<Vec<Lit>> {
        Ok(self
            .not_covered_clause(pattern)?
            .into_iter()
            .map(|l| !l)
            .collect())
    }

    pub fn add_not_covered(&mut self, pattern: &Pattern) -> Result<()> {
        let clause = self.not_covered_clause(pattern)?;
        self.add_permanent(clause);
        Ok(())
    }

    pub fn add_not_covered_set(&mut self, set: &PatternSet) -> Result<()> {
        for p in set {
            self.add_not_covered(p)?;
        }
        Ok(())
    }

    /// Literal that, when true, forces the graph to be an instance of
    /// `pattern`.
    pub fn activator(&mut self, pattern: &Pattern) -> Result<Lit> {
        if let Some(&a) = self.activators.get(pattern) {
            return Ok(a);
        }
        let a = self.solver.new_var().positive();
        for (k, cell) in pattern.cells().iter().enumerate() {
            let p = k + 1;
            let implied = match *cell {
                Cell::Zero => !self.x(p),
                Cell::One => self.x(p),
                Cell::Var(r) if r as usize != p => self.eq(r as usize, p)?,
                Cell::Var(_) => continue,
            };
            self.add_permanent(vec![!a, implied]);
        }
        self.activators.insert(pattern.clone(), a);
        Ok(a)
    }

    pub fn new_group(&mut self) -> GroupId {
        GroupId(self.solver.new_var().positive())
    }

    /// Adds `clause` active only while the group's selector is assumed.
    pub fn add_to_group(&mut self, group: GroupId, clause: &[Lit]) {
        let mut c = Vec::with_capacity(clause.len() + 1);
        c.push(!group.0);
        c.extend_from_slice(clause);
        self.solver.add_clause(&c);
    }

    pub fn add_not_covered_to_group(&mut self, group: GroupId, pattern: &Pattern) -> Result<()> {
        let clause = self.not_covered_clause(pattern)?;
        self.add_to_group(group, &clause);
        Ok(())
    }

    /// Permanently disables a group; its clauses are reclaimed lazily.
    pub fn retire(&mut self, group: GroupId) {
        self.solver.add_clause(&[!group.0]);
        self.retired_since_simplify += 1;
        if self.retired_since_simplify >= 64 {
            self.solver.simplify();
            self.retired_since_simplify = 0;
        }
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.solver.solve(assumptions)
    }

    /// The graph read off the `x` variables of the last model.
    pub fn model_graph(&self) -> Graph {
        let bits: Vec<bool> = (0..self.m)
            .map(|k| self.solver.model_value(var_at(k)))
            .collect();
        Graph::from_bits(self.order, &bits).expect("model has m bits")
    }

    /// Every distinct graph satisfying the formula under `assumptions`.
    pub fn models(&mut self, assumptions: &[Lit]) -> Models<'_> {
        let group = self.new_group();
        let mut assumptions = assumptions.to_vec();
        assumptions.push(group.0);
        Models {
            encoder: self,
            group,
            assumptions,
            done: false,
        }
    }

    /// Permanent clauses (variable definitions and `notCovered` constraints)
    /// in DIMACS format. Group clauses and learnt clauses are omitted.
    pub fn dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p cnf {} {}",
            self.solver.num_vars(),
            self.permanent.len()
        );
        for clause in &self.permanent {
            for l in clause {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn permanent_clause_count(&self) -> usize {
        self.permanent.len()
    }
}

fn var_at(index: usize) -> Var {
    Var::pos_index(index)
}

/// Iterator over projected models; see [`Encoder::models`].
pub struct Models<'a> {
    encoder: &'a mut Encoder,
    group: GroupId,
    assumptions: Vec<Lit>,
    done: bool,
}

impl Iterator for Models<'_> {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        if self.done {
            return None;
        }
        if !self.encoder.solve(&self.assumptions) {
            self.done = true;
            return None;
        }
        let g = self.encoder.model_graph();
        let block: Vec<Lit> = (1..=self.encoder.m)
            .map(|p| {
                let x = self.encoder.x(p);
                if g.bit(p) {
                    !x
                } else {
                    x
                }
            })
            .collect();
        self.encoder.add_to_group(self.group, &block);
        Some(g)
    }
}

impl Drop for Models<'_> {
    fn drop(&mut self) {
        self.encoder.retire(self.group);
    }
}
