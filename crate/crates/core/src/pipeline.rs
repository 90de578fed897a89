//! The end-to-end computation: graph sweep for a first backbone set, then
//! refinement alternating with SAT backbone tests until neither changes
//! anything, then the explicit set cover of what is left.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::backbone::{
    backbones_among, check_scan_order, BackboneState, SweepOptions, DEFAULT_BOUND,
};
use crate::dominance::DominanceSession;
use crate::emit::{cnf_size, verify_break, BreakKind, BreakSpec, Provenance};
use crate::error::{Error, Result};
use crate::graph::{count_canonical, SWEEP_ORDER_LIMIT};
use crate::perm::{all_permutations, Permutation};
use crate::setcover::{build_matrix, BuildOptions};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub order: usize,
    pub bound: usize,
    pub skip_iterative: bool,
    pub sweep: SweepOptions,
    pub matrix: BuildOptions,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Checkpoint file written between phases and read back on start.
    pub state_path: Option<PathBuf>,
    /// Stop with [`Error::Interrupted`] once a phase ends past this budget.
    pub time_budget: Option<Duration>,
    /// Skip the brute-force check of the result even when it is cheap.
    pub skip_verify: bool,
}

impl PipelineConfig {
    pub fn new(order: usize) -> Self {
        PipelineConfig {
            order,
            bound: DEFAULT_BOUND,
            skip_iterative: false,
            sweep: SweepOptions::default(),
            matrix: BuildOptions::default(),
            workers: None,
            state_path: None,
            time_budget: None,
            skip_verify: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub sweep: Duration,
    pub alternation: Duration,
    pub cover: Duration,
    pub verify: Duration,
}

/// One field per column of the backbone table. Wall-clock timings are kept
/// out of the serialised form so that reports are reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub order: usize,
    pub bound: usize,
    /// Backbones from the graph sweep; absent when it was skipped.
    pub bb1: Option<usize>,
    pub bb2: usize,
    pub rounds: usize,
    pub rows: usize,
    pub cols: usize,
    /// Smallest and largest row weight of the matrix, `[0, 0]` if empty.
    pub sets: [usize; 2],
    pub reduced_rows: usize,
    pub reduced_cols: usize,
    /// Rows forced by the matrix reductions.
    pub forced: usize,
    /// Rows chosen by branch and bound after the reductions.
    pub searched: usize,
    pub search_nodes: u64,
    pub opt: usize,
    pub enc_clauses: usize,
    pub enc_vars: usize,
    /// Graphs admitted by the break, when verified.
    pub solutions: Option<u64>,
    pub canonical: Option<u64>,
    #[serde(skip)]
    pub timings: Timings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Phase {
    Swept,
    Alternating,
    Fixpoint,
}

/// Saved between phases: enough to restart the alternation where it left
/// off.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Checkpoint {
    order: usize,
    bound: usize,
    phase: Phase,
    bb1: Option<usize>,
    rounds: usize,
    beta: Vec<Permutation>,
    universe: Vec<Permutation>,
}

impl Checkpoint {
    fn load(path: &Path) -> Result<Option<Checkpoint>> {
        match fs::read_to_string(path) {
            Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)? + "\n")?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    started: Instant,
}

impl Run<'_> {
    fn checkpoint(&self, state: &Checkpoint) -> Result<()> {
        let Some(path) = &self.cfg.state_path else {
            return Ok(());
        };
        state.save(path)?;
        match self.cfg.time_budget {
            Some(budget) if self.started.elapsed() > budget => Err(Error::Interrupted {
                phase: match state.phase {
                    Phase::Swept => "the graph sweep",
                    Phase::Alternating => "an alternation round",
                    Phase::Fixpoint => "the alternation",
                },
                state: path.display().to_string(),
            }),
            _ => Ok(()),
        }
    }

    fn initial(&self, timings: &mut Timings) -> Result<Checkpoint> {
        let cfg = self.cfg;
        if let Some(path) = &cfg.state_path {
            if let Some(state) = Checkpoint::load(path)? {
                if state.order == cfg.order && state.bound == cfg.bound {
                    return Ok(state);
                }
                return Err(Error::Usage(format!(
                    "state file {} belongs to order {} bound {}",
                    path.display(),
                    state.order,
                    state.bound
                )));
            }
        }
        let t = Instant::now();
        let (beta, bb1) = if cfg.skip_iterative {
            (Vec::new(), None)
        } else {
            let mut sweep = BackboneState::new(
                cfg.order,
                SweepOptions {
                    bound: cfg.bound,
                    ..cfg.sweep
                },
            )?;
            sweep.sweep(|_, _| {})?;
            let beta = sweep.beta();
            let len = beta.len();
            (beta, Some(len))
        };
        timings.sweep = t.elapsed();
        let universe = all_permutations(cfg.order)?
            .into_iter()
            .filter(|p| !p.is_identity() && !beta.contains(p))
            .collect();
        let state = Checkpoint {
            order: cfg.order,
            bound: cfg.bound,
            phase: Phase::Swept,
            bb1,
            rounds: 0,
            beta,
            universe,
        };
        self.checkpoint(&state)?;
        Ok(state)
    }

    fn alternate(&self, state: &mut Checkpoint) -> Result<()> {
        let mut session = DominanceSession::with_base(state.order, &state.beta)?;
        while state.phase != Phase::Fixpoint {
            let refined = session.refine(&state.universe)?;
            let shrunk = refined.len() != state.universe.len();
            state.universe = refined;
            let new = backbones_among(&state.universe, &state.beta, &state.beta)?;
            state.rounds += 1;
            if new.is_empty() && !shrunk {
                state.phase = Phase::Fixpoint;
            } else {
                state.phase = Phase::Alternating;
                state.universe.retain(|p| !new.contains(p));
                for b in &new {
                    session.add_base(b)?;
                }
                state.beta.extend(new);
            }
            self.checkpoint(state)?;
        }
        Ok(())
    }
}

/// Runs every phase for `cfg.order` and returns the optimal break with its
/// report. For orders up to 7 the break is checked against the number of
/// canonical graphs, and a mismatch is an error.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(BreakSpec, RunReport)> {
    check_scan_order(cfg.order)?;
    if cfg.bound == 0 {
        return Err(Error::Usage("bound must be at least 1".into()));
    }
    match cfg.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {k} workers: {e}")))?
            .install(|| run(cfg)),
        None => run(cfg),
    }
}

fn run(cfg: &PipelineConfig) -> Result<(BreakSpec, RunReport)> {
    let run = Run {
        cfg,
        started: Instant::now(),
    };
    let mut timings = Timings::default();
    let mut state = run.initial(&mut timings)?;
    let t = Instant::now();
    run.alternate(&mut state)?;
    timings.alternation = t.elapsed();

    let t = Instant::now();
    let matrix = build_matrix(&state.universe, &state.beta, cfg.matrix)?;
    let reduced = matrix.reduce();
    let solution = matrix.solve_exact()?;
    timings.cover = t.elapsed();

    let mut perms = state.beta.clone();
    perms.extend(solution.chosen.iter().cloned());
    perms.sort();
    let spec = BreakSpec::from_permutations(
        cfg.order,
        perms,
        Provenance {
            backbones: Some(state.beta.len()),
            matrix_rows: Some(matrix.row_count()),
            matrix_cols: Some(matrix.col_count()),
            forced: Some(solution.forced_count),
            search_nodes: Some(solution.stats.nodes),
            ..Provenance::new(BreakKind::Optimal)
        },
    )?;
    let enc = cnf_size(&spec)?;

    let t = Instant::now();
    let (solutions, canonical) = if cfg.order <= SWEEP_ORDER_LIMIT && !cfg.skip_verify {
        let found = verify_break(&spec, false)?;
        let expected = count_canonical(cfg.order)?;
        if found != expected {
            return Err(Error::VerificationFailed { found, expected });
        }
        (Some(found), Some(expected))
    } else {
        (None, None)
    };
    timings.verify = t.elapsed();

    let [lo, hi] = matrix.weight_range().map_or([0, 0], |(a, b)| [a, b]);
    let report = RunReport {
        order: cfg.order,
        bound: cfg.bound,
        bb1: state.bb1,
        bb2: state.beta.len(),
        rounds: state.rounds,
        rows: matrix.row_count(),
        cols: matrix.col_count(),
        sets: [lo, hi],
        reduced_rows: reduced.row_count(),
        reduced_cols: reduced.col_count(),
        forced: solution.forced_count,
        searched: solution.chosen.len() - solution.forced_count,
        search_nodes: solution.stats.nodes,
        opt: spec.permutations.len(),
        enc_clauses: enc.clauses,
        enc_vars: enc.variables,
        solutions,
        canonical,
        timings,
    };
    Ok((spec, report))
}
