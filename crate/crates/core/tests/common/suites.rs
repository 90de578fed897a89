//! Property suites checked against the brute-force oracles; each panics on
//! the first counterexample.

use super::{cover_set, covers, graphs, nontrivial, random_subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symcover::backbone::{backbones_among, find_backbones_sat, BackboneState, SweepOptions};
use symcover::bitset::BitSet;
use symcover::dominance::{get_dominated, refine};
use symcover::emit::{emit_cnf, redundancy_ratio, verify_break, BreakKind};
use symcover::graph::pair_count;
use symcover::setcover::{build_matrix, BuildOptions};
use symcover::{
    run_pipeline, BreakSpec, CoverMatrix, Graph, GraphId, PatternSet, Permutation, PipelineConfig,
    Provenance,
};

pub fn patterns_partition_the_cover() {
    for n in 2..=5 {
        for pi in nontrivial(n) {
            let set = PatternSet::of(&pi);
            for g in graphs(n) {
                let hits = set.iter().filter(|p| p.matches(g)).count();
                assert!(hits <= 1, "{pi}: {g:?} matches {hits} patterns");
                assert_eq!(hits == 1, covers(&pi, &g), "{pi} on {g:?}");
            }
            let total: u64 = set.iter().map(|p| p.instance_count()).sum();
            let brute = graphs(n).filter(|g| covers(&pi, g)).count() as u64;
            assert_eq!(total, brute, "{pi}");
        }
    }
}

pub fn dominance_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = rng.gen_range(3..=5);
        let dominators = random_subset(&mut rng, n, 6);
        let candidates = random_subset(&mut rng, n, 8);
        let big = cover_set(&dominators, n);
        let want: Vec<Permutation> = candidates
            .iter()
            .filter(|c| {
                cover_set(std::slice::from_ref(*c), n)
                    .iter()
                    .zip(&big)
                    .all(|(a, b)| !a || *b)
            })
            .cloned()
            .collect();
        let got = get_dominated(&dominators, &candidates).unwrap();
        assert_eq!(got, want, "case {case}: {dominators:?} vs {candidates:?}");
    }
}

pub fn refine_keeps_the_union_and_drops_pairwise_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(3..=5);
        let s = random_subset(&mut rng, n, 12);
        let beta = random_subset(&mut rng, n, 2);
        let kept = refine(&s, &beta).unwrap();
        let with = |set: &[Permutation]| {
            let mut all = set.to_vec();
            all.extend(beta.iter().cloned());
            cover_set(&all, n)
        };
        let rest: Vec<Permutation> = s.iter().filter(|p| !beta.contains(p)).cloned().collect();
        assert_eq!(with(&kept), with(&rest));
    }
}

fn exhaustive_minimum(bits: &[Vec<bool>], cols: usize) -> Option<usize> {
    let rows = bits.len();
    (0u32..1 << rows)
        .filter(|mask| (0..cols).all(|c| (0..rows).any(|r| mask >> r & 1 == 1 && bits[r][c])))
        .map(|mask| mask.count_ones() as usize)
        .min()
}

pub fn exact_cover_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let labels = nontrivial(5);
    for case in 0..100 {
        let rows = rng.gen_range(1..=12);
        let cols = rng.gen_range(1..=20);
        let density = rng.gen_range(0.1..0.6);
        let mut bits: Vec<Vec<bool>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_bool(density)).collect())
            .collect();
        for c in 0..cols {
            if !bits.iter().any(|r| r[c]) {
                let r = rng.gen_range(0..rows);
                bits[r][c] = true;
            }
        }
        let matrix = CoverMatrix::new(
            5,
            labels[..rows].to_vec(),
            (0..cols as u64).map(GraphId).collect(),
            bits.iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, b)| **b)
                        .map(|(c, _)| c)
                        .collect::<BitSet>()
                })
                .map(|mut b| {
                    b.grow(cols);
                    b
                })
                .collect(),
            vec![],
        )
        .unwrap();
        let want = exhaustive_minimum(&bits, cols).unwrap();
        let solution = matrix.solve_exact().unwrap();
        assert_eq!(solution.chosen.len(), want, "case {case}");
        let chosen: Vec<usize> = solution
            .chosen
            .iter()
            .map(|p| labels.iter().position(|l| l == p).unwrap())
            .collect();
        assert!(
            (0..cols).all(|c| chosen.iter().any(|&r| bits[r][c])),
            "case {case}"
        );

        let reduced = matrix.reduce();
        let rest = reduced.solve_exact().unwrap();
        assert_eq!(
            rest.chosen.len(),
            want,
            "case {case}: reduction lost the optimum"
        );
    }
}

/// Members of `universe` that cover some graph no other member covers.
fn brute_backbones(universe: &[Permutation], fixed: &[Permutation], n: usize) -> Vec<Permutation> {
    let fixed_cover = cover_set(fixed, n);
    let mut out = Vec::new();
    for (k, pi) in universe.iter().enumerate() {
        let sole = graphs(n).enumerate().any(|(w, g)| {
            !fixed_cover[w]
                && covers(pi, &g)
                && universe
                    .iter()
                    .enumerate()
                    .all(|(j, q)| j == k || !covers(q, &g))
        });
        if sole {
            out.push(pi.clone());
        }
    }
    out
}

pub fn backbones_match_brute_force() {
    for n in 3..=5 {
        let all = nontrivial(n);
        assert_eq!(
            find_backbones_sat(&all, &[]).unwrap(),
            brute_backbones(&all, &[], n),
            "order {n}"
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..40 {
        let n = rng.gen_range(3..=5);
        let mut universe = random_subset(&mut rng, n, 15);
        universe.sort();
        let split = rng.gen_range(0..=universe.len().min(3));
        let fixed: Vec<Permutation> = universe.drain(..split).collect();
        let seed = if case % 2 == 0 { fixed.clone() } else { vec![] };
        assert_eq!(
            backbones_among(&universe, &fixed, &seed).unwrap(),
            brute_backbones(&universe, &fixed, n),
            "case {case}"
        );
    }
}

pub fn sweep_leaps_skip_no_backbone() {
    for n in 2..=5 {
        for bound in [1, 3, 10] {
            for many_leap_limit in [0, 4, usize::MAX] {
                let mut state = BackboneState::new(
                    n,
                    SweepOptions {
                        bound,
                        debug_rescan: true,
                        many_leap_limit,
                    },
                )
                .unwrap();
                state.sweep(|_, _| {}).unwrap();
                let stats = state.stats();
                assert_eq!(stats.missed_backbones, 0, "n={n} bound={bound}: {stats:?}");
                assert_eq!(stats.visited + stats.skipped, 1 << pair_count(n));
            }
        }
    }
}

/// Backbones are only unique modulo dominance, so the check is that
/// committing to them loses nothing against the full matrix optimum.
pub fn backbone_pipeline_is_optimal() {
    for n in 3..=5 {
        let full = build_matrix(&nontrivial(n), &[], BuildOptions::default()).unwrap();
        let best = full.solve_exact().unwrap().chosen.len();
        for skip_iterative in [false, true] {
            let mut cfg = PipelineConfig::new(n);
            cfg.skip_iterative = skip_iterative;
            let (spec, report) = run_pipeline(&cfg).unwrap();
            assert_eq!(spec.permutations.len(), best, "order {n}");
            assert_eq!(report.solutions, report.canonical);
        }
    }
}

pub fn redundancy_ratio_never_grows_along_a_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let n = rng.gen_range(3..=5);
        let chain = random_subset(&mut rng, n, 20);
        let mut last = f64::INFINITY;
        for k in 0..=chain.len() {
            let rho = redundancy_ratio(&chain[..k], n).unwrap();
            assert!(rho <= last + 1e-12);
            last = rho;
        }
    }
}

/// Assignments of `x_1..x_m` that extend to a model of the DIMACS text.
fn projected_model_count(cnf: &str, m: usize) -> u64 {
    let mut lines = cnf.lines();
    let header: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .skip(2)
        .map(|t| t.parse().unwrap())
        .collect();
    let vars = header[0];
    let clauses: Vec<Vec<i64>> = lines
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse().unwrap())
                .take_while(|&v: &i64| v != 0)
                .collect()
        })
        .collect();
    let aux = vars - m;
    let mut count = 0;
    for x in 0u64..1 << m {
        let extends = (0u64..1 << aux).any(|e| {
            let value = |v: i64| {
                let k = v.unsigned_abs() as usize - 1;
                let bit = if k < m { x >> k & 1 } else { e >> (k - m) & 1 };
                (bit == 1) == (v > 0)
            };
            clauses.iter().all(|c| c.iter().any(|&v| value(v)))
        });
        if extends {
            count += 1;
        }
    }
    count
}

pub fn cnf_models_agree_with_verification() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..12 {
        let n = rng.gen_range(3..=4);
        let perms = random_subset(&mut rng, n, 5);
        let spec =
            BreakSpec::from_permutations(n, perms, Provenance::new(BreakKind::Partial)).unwrap();
        let mut out = Vec::new();
        let stats = emit_cnf(&spec, &mut out).unwrap();
        if stats.equality_variables > 12 {
            continue;
        }
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            projected_model_count(&text, pair_count(n)),
            verify_break(&spec, false).unwrap()
        );
    }
}

pub fn break_semantics_match_lex_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..20 {
        let n = rng.gen_range(3..=5);
        let perms = random_subset(&mut rng, n, 6);
        let spec =
            BreakSpec::from_permutations(n, perms.clone(), Provenance::new(BreakKind::Partial))
                .unwrap();
        let admitted: u64 = graphs(n)
            .filter(|g: &Graph| perms.iter().all(|p| !covers(p, g)))
            .count() as u64;
        assert_eq!(verify_break(&spec, false).unwrap(), admitted);
    }
}
