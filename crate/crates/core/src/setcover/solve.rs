//! Exact minimum set cover by branch and bound.

use super::reduce::Work;
use crate::bitset::BitSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned: u64,
}

/// Columns with pairwise-disjoint covering rows; each needs its own row.
fn disjoint_bound(w: &Work) -> usize {
    let mut cols: Vec<(usize, usize)> =
        w.col_alive.iter().map(|c| (w.cols[c].count(), c)).collect();
    cols.sort_unstable();
    let mut used = BitSet::new(w.rows.len());
    let mut count = 0;
    for (_, c) in cols {
        if !w.cols[c].intersects(&used) {
            used.union_with(&w.cols[c]);
            count += 1;
        }
    }
    count
}

fn greedy(mut w: Work) -> Vec<usize> {
    let mut chosen = Vec::new();
    while w.live_cols() > 0 {
        let best = w
            .row_alive
            .iter()
            .max_by_key(|&r| (w.rows[r].count(), std::cmp::Reverse(r)))
            .expect("feasible cover");
        chosen.push(best);
        w.take_row(best);
    }
    chosen
}

struct Search {
    best: Vec<usize>,
    stats: SearchStats,
}

impl Search {
    fn visit(&mut self, mut w: Work, mut chosen: Vec<usize>) {
        self.stats.nodes += 1;
        chosen.extend(w.reduce());
        if w.infeasible() {
            self.stats.pruned += 1;
            return;
        }
        if w.live_cols() == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen;
            }
            return;
        }
        if chosen.len() + disjoint_bound(&w) >= self.best.len() {
            self.stats.pruned += 1;
            return;
        }
        let column = w
            .col_alive
            .iter()
            .min_by_key(|&c| (w.cols[c].count(), c))
            .unwrap();
        let mut options: Vec<usize> = w.cols[column].iter().collect();
        options.sort_by_key(|&r| (std::cmp::Reverse(w.rows[r].count()), r));
        let mut rest = w;
        for r in options {
            let mut child = rest.clone();
            child.take_row(r);
            let mut next = chosen.clone();
            next.push(r);
            self.visit(child, next);
            // later branches exclude rows already tried
            rest.remove_row(r);
            if rest.infeasible() {
                break;
            }
        }
    }
}

/// A minimum set of rows covering every live column, with search statistics.
pub(crate) fn minimum_cover(w: Work) -> (Vec<usize>, SearchStats) {
    let mut search = Search {
        best: greedy(w.clone()),
        stats: SearchStats::default(),
    };
    search.visit(w, Vec::new());
    (search.best, search.stats)
}
