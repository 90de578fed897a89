//! In-place reductions on a working copy of a cover matrix.

use crate::bitset::BitSet;

/// Row bitsets over columns and column bitsets over rows, kept in sync,
/// plus the live rows and columns.
#[derive(Clone, Debug)]
pub(crate) struct Work {
    pub rows: Vec<BitSet>,
    pub cols: Vec<BitSet>,
    pub row_alive: BitSet,
    pub col_alive: BitSet,
}

impl Work {
    pub fn new(row_bits: &[BitSet], ncols: usize) -> Self {
        let nrows = row_bits.len();
        let mut cols = vec![BitSet::new(nrows); ncols];
        for (r, bits) in row_bits.iter().enumerate() {
            for c in bits.iter() {
                cols[c].insert(r);
            }
        }
        Work {
            rows: row_bits.to_vec(),
            cols,
            row_alive: BitSet::full(nrows),
            col_alive: BitSet::full(ncols),
        }
    }

    pub fn live_cols(&self) -> usize {
        self.col_alive.count()
    }

    pub fn remove_row(&mut self, r: usize) {
        if !self.row_alive.contains(r) {
            return;
        }
        for c in self.rows[r].iter() {
            self.cols[c].remove(r);
        }
        self.row_alive.remove(r);
    }

    pub fn remove_col(&mut self, c: usize) {
        if !self.col_alive.contains(c) {
            return;
        }
        for r in self.cols[c].iter() {
            self.rows[r].remove(c);
        }
        self.col_alive.remove(c);
    }

    /// Commits row `r`: every column it covers is satisfied.
    pub fn take_row(&mut self, r: usize) {
        let covered: Vec<usize> = self.rows[r].iter().collect();
        for c in covered {
            self.remove_col(c);
        }
        self.remove_row(r);
    }

    /// Removes empty rows and rows contained in another row; of two equal
    /// rows the lower index survives.
    pub fn dominated_rows(&mut self) -> bool {
        let mut changed = false;
        let live: Vec<usize> = self.row_alive.iter().collect();
        for r1 in live {
            let Some(first) = self.rows[r1].first() else {
                self.remove_row(r1);
                changed = true;
                continue;
            };
            let dominated = self.cols[first].iter().any(|r2| {
                r2 != r1
                    && self.rows[r1].is_subset(&self.rows[r2])
                    && (r2 < r1 || !self.rows[r2].is_subset(&self.rows[r1]))
            });
            if dominated {
                self.remove_row(r1);
                changed = true;
            }
        }
        changed
    }

    /// Removes every column whose covering rows include all rows covering
    /// some other column; of two equal columns the lower index survives.
    pub fn dominated_cols(&mut self) -> bool {
        let mut order: Vec<(usize, usize)> = self
            .col_alive
            .iter()
            .map(|c| (self.cols[c].count(), c))
            .collect();
        order.sort_unstable();
        let mut changed = false;
        for (_, c1) in order {
            if !self.col_alive.contains(c1) {
                continue;
            }
            // Columns covered by every row that covers c1.
            let mut wider = self.col_alive.clone();
            for r in self.cols[c1].iter() {
                wider.intersect_with(&self.rows[r]);
            }
            wider.remove(c1);
            if self.cols[c1].is_empty() {
                continue;
            }
            for c2 in wider.iter().collect::<Vec<_>>() {
                self.remove_col(c2);
                changed = true;
            }
        }
        changed
    }

    /// Commits rows that are the only cover of some column.
    fn essential_rows(&mut self, forced: &mut Vec<usize>) -> bool {
        let mut changed = false;
        let live: Vec<usize> = self.col_alive.iter().collect();
        for c in live {
            if !self.col_alive.contains(c) {
                continue;
            }
            if self.cols[c].count() == 1 {
                let r = self.cols[c].first().unwrap();
                forced.push(r);
                self.take_row(r);
                changed = true;
            }
        }
        changed
    }

    /// Applies the three reductions to a fixpoint, returning the rows
    /// committed along the way.
    pub fn reduce(&mut self) -> Vec<usize> {
        let mut forced = Vec::new();
        loop {
            let a = self.dominated_rows();
            let b = self.dominated_cols();
            let c = self.essential_rows(&mut forced);
            if !(a || b || c) {
                break;
            }
        }
        forced
    }

    /// Some live column no live row covers.
    pub fn infeasible(&self) -> bool {
        self.col_alive.iter().any(|c| self.cols[c].is_empty())
    }
}
