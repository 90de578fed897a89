use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use symcover::backbone::{
    backbones_among, check_scan_order, BackboneState, SweepOptions, DEFAULT_BOUND,
};
use symcover::emit::{emit_cnf, redundancy_ratio, verify_break, BreakKind};
use symcover::graph::{canonical_ids, count_canonical};
use symcover::pattern::{PatternSet, DEFAULT_INSTANCE_BUDGET};
use symcover::setcover::{build_matrix, BuildOptions, ColumnSource};
use symcover::{
    all_permutations, run_pipeline, transpositions, BreakSpec, CoverMatrix, Error, Permutation,
    PipelineConfig, Result,
};

#[derive(Parser)]
#[command(
    name = "symcover",
    version,
    about = "Optimal lex-leader symmetry breaks for graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every phase and write the optimal break.
    Solve {
        #[arg(short = 'n')]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        /// Break file (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report file (JSON); printed to stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        /// DIMACS encoding of the break.
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long)]
        skip_iterative: bool,
        /// Checkpoint file for resumable runs.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Stop after the phase that exceeds this many seconds.
        #[arg(long)]
        time_budget: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_INSTANCE_BUDGET)]
        budget: u64,
    },
    /// Find backbone permutations.
    Backbones {
        #[arg(short = 'n')]
        order: usize,
        #[arg(long, value_enum, default_value_t = Method::Iter)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        /// Recheck every block the sweep skips.
        #[arg(long)]
        rescan: bool,
    },
    /// Patterns, cover size and covered graph ids of one permutation.
    Cover {
        #[arg(long)]
        perm: Permutation,
        #[arg(short = 'n')]
        order: usize,
    },
    /// Build the explicit matrix over the permutations not in `--beta`.
    Matrix {
        #[arg(short = 'n')]
        order: usize,
        /// Break file or JSON list of permutations taken as already chosen.
        #[arg(long)]
        beta: Option<PathBuf>,
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        opb: Option<PathBuf>,
        /// Also reduce and solve the matrix.
        #[arg(long)]
        solve: bool,
        #[arg(long, value_enum)]
        source: Option<Source>,
        #[arg(long, default_value_t = DEFAULT_INSTANCE_BUDGET)]
        budget: u64,
    },
    /// Reduce and solve a dumped matrix.
    Reduce {
        #[arg(long)]
        matrix: PathBuf,
        /// Write the reduced matrix.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Count the graphs a break admits and compare with the canonical count.
    Verify {
        #[arg(long = "break")]
        file: PathBuf,
        /// Allow the order-8 sweep.
        #[arg(long)]
        long: bool,
    },
    /// Size and redundancy ratio of a partial break.
    Partial {
        #[arg(short = 'n')]
        order: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
    /// Count (or list) the canonical graphs.
    Canonical {
        #[arg(short = 'n')]
        order: usize,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Iter,
    Sat,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Sweep,
    Patterns,
    Sat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Trns,
    Backbones,
}

fn nontrivial(n: usize) -> Result<Vec<Permutation>> {
    Ok(all_permutations(n)?
        .into_iter()
        .filter(|p| !p.is_identity())
        .collect())
}

fn format_perms(perms: &[Permutation]) -> String {
    perms
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A break file, or a bare JSON list of permutations.
fn read_perms(path: &Path) -> Result<Vec<Permutation>> {
    let text = fs::read_to_string(path)?;
    match BreakSpec::from_json(&text) {
        Ok(spec) => Ok(spec.permutations),
        Err(_) => Ok(serde_json::from_str(&text)?),
    }
}

fn sweep(order: usize, bound: usize, rescan: bool) -> Result<BackboneState> {
    let mut state = BackboneState::new(
        order,
        SweepOptions {
            bound,
            debug_rescan: rescan,
            ..SweepOptions::default()
        },
    )?;
    state.sweep(|stats, found| {
        eprintln!(
            "visited {} skipped {} backbones {found}",
            stats.visited, stats.skipped
        )
    })?;
    Ok(state)
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

fn print_matrix(out: &mut impl Write, label: &str, m: &CoverMatrix) -> Result<()> {
    let range = m
        .weight_range()
        .map_or("-".to_string(), |(lo, hi)| format!("{lo}-{hi}"));
    writeln!(
        out,
        "{label}: {} rows x {} cols, row weights {range}, forced {}",
        m.row_count(),
        m.col_count(),
        m.forced().len()
    )?;
    Ok(())
}

fn solve_matrix(out: &mut impl Write, m: &CoverMatrix) -> Result<()> {
    print_matrix(out, "reduced", &m.reduce())?;
    let sol = m.solve_exact()?;
    writeln!(
        out,
        "optimum {} ({} forced, {} search nodes)",
        sol.chosen.len(),
        sol.forced_count,
        sol.stats.nodes
    )?;
    writeln!(out, "chosen {}", format_perms(&sol.chosen))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Solve {
            order,
            bound,
            out,
            report,
            cnf,
            skip_iterative,
            state,
            time_budget,
            workers,
            budget,
        } => {
            let mut cfg = PipelineConfig::new(order);
            cfg.bound = bound;
            cfg.skip_iterative = skip_iterative;
            cfg.state_path = state;
            cfg.time_budget = time_budget.map(Duration::from_secs);
            cfg.workers = workers;
            cfg.matrix.budget = budget;
            let (spec, rep) = run_pipeline(&cfg)?;
            let t = rep.timings;
            eprintln!(
                "sweep {:.2?}, alternation {:.2?}, cover {:.2?}, verify {:.2?}",
                t.sweep, t.alternation, t.cover, t.verify
            );
            if let Some(path) = out {
                spec.write_file(&path)?;
            }
            if let Some(path) = cnf {
                write_with(&path, |w| emit_cnf(&spec, w).map(|_| ()))?;
            }
            let text = serde_json::to_string_pretty(&rep)? + "\n";
            match report {
                Some(path) => fs::write(path, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
        }
        Command::Backbones {
            order,
            method,
            bound,
            rescan,
        } => {
            check_scan_order(order)?;
            let mut iter = None;
            if method != Method::Sat {
                let state = sweep(order, bound, rescan)?;
                let beta = state.beta();
                writeln!(stdout, "iterative {}: {}", beta.len(), format_perms(&beta))?;
                writeln!(stdout, "{}", serde_json::to_string(&state.stats())?)?;
                iter = Some(beta);
            }
            if method != Method::Iter {
                let seed = iter.clone().unwrap_or_default();
                let found = backbones_among(&nontrivial(order)?, &[], &seed)?;
                writeln!(stdout, "sat {}: {}", found.len(), format_perms(&found))?;
            }
        }
        Command::Cover { perm, order } => {
            if perm.degree() != order {
                return Err(Error::Usage(format!(
                    "{perm} is not a permutation of 1..{order}"
                )));
            }
            let set = PatternSet::of(&perm);
            for p in &set {
                writeln!(
                    stdout,
                    "pattern {} ⟨{p}⟩ {} graphs",
                    p.first_diff().unwrap_or(0),
                    p.instance_count()
                )?;
            }
            let mut ids: Vec<u64> = Vec::new();
            for p in &set {
                ids.extend(p.instances(DEFAULT_INSTANCE_BUDGET)?.map(|g| g.id().0));
            }
            ids.sort_unstable();
            writeln!(stdout, "cover {}", ids.len())?;
            let ids: Vec<String> = ids.iter().map(u64::to_string).collect();
            writeln!(stdout, "ids {}", ids.join(" "))?;
        }
        Command::Matrix {
            order,
            beta,
            dump,
            opb,
            solve,
            source,
            budget,
        } => {
            let beta = match beta {
                Some(path) => read_perms(&path)?,
                None => Vec::new(),
            };
            let rows: Vec<Permutation> = nontrivial(order)?
                .into_iter()
                .filter(|p| !beta.contains(p))
                .collect();
            let options = BuildOptions {
                budget,
                source: source.map(|s| match s {
                    Source::Sweep => ColumnSource::Sweep,
                    Source::Patterns => ColumnSource::Patterns,
                    Source::Sat => ColumnSource::Sat,
                }),
            };
            let m = build_matrix(&rows, &beta, options)?;
            print_matrix(&mut stdout, "matrix", &m)?;
            if let Some(path) = dump {
                write_with(&path, |w| m.write_dump(w))?;
            }
            if let Some(path) = opb {
                write_with(&path, |w| m.write_opb(w))?;
            }
            if solve {
                solve_matrix(&mut stdout, &m)?;
            }
        }
        Command::Reduce { matrix, dump } => {
            let m = CoverMatrix::read_dump(BufReader::new(File::open(matrix)?))?;
            print_matrix(&mut stdout, "matrix", &m)?;
            if let Some(path) = dump {
                let reduced = m.reduce();
                write_with(&path, |w| reduced.write_dump(w))?;
            }
            solve_matrix(&mut stdout, &m)?;
        }
        Command::Verify { file, long } => {
            let spec = BreakSpec::read_file(&file)?;
            let found = verify_break(&spec, long)?;
            let expected = count_canonical(spec.order)?;
            let ok = found == expected;
            writeln!(
                stdout,
                "{found} solutions, expected {expected}, {}",
                if ok { "OK" } else { "FAILED" }
            )?;
            if !ok {
                return Ok(ExitCode::from(1));
            }
            if spec.provenance.kind == BreakKind::External {
                eprintln!("note: break has no recorded provenance");
            }
        }
        Command::Partial { order, mode, bound } => {
            let perms = match mode {
                Mode::Trns => transpositions(order),
                Mode::Backbones => {
                    check_scan_order(order)?;
                    sweep(order, bound, false)?.beta()
                }
            };
            let rho = redundancy_ratio(&perms, order)?;
            writeln!(
                stdout,
                "{} permutations, ρ = {rho:.2} ({rho:.4})",
                perms.len()
            )?;
        }
        Command::Canonical { order, list } => {
            if list {
                let ids = canonical_ids(order)?;
                writeln!(stdout, "{} canonical graphs", ids.len())?;
                for id in ids {
                    writeln!(stdout, "{}", id.0)?;
                }
            } else {
                writeln!(stdout, "{} canonical graphs", count_canonical(order)?)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::VerificationFailed { found, expected }) => {
            eprintln!("error: break admits {found} graphs, expected {expected}");
            ExitCode::from(1)
        }
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
