//! Differential checking of the incremental system against the reference
//! system on generated programs and edit scripts.
//!
//! For a program and a script of input overwrites, the incremental system
//! runs once on the initial inputs and then once after each edit, always on
//! the graph left by the previous run. After every run the reference system
//! evaluates the program from scratch on the current inputs. The two
//! terminals must agree, the reference store must embed in the restricted
//! incremental graph, and the graph must be well formed.

use std::fmt;
use std::ops::Range;

use nominal_core::{Namespace, Pointer, Violation};

use crate::eval::{domain, embedding_gap, restrict, store_of_refs, Incremental, Reference, RuleHits};
use crate::gen::{gen_case, Case, Edit};
use crate::syntax::{Computation, Terminal};

/// Unrolling bound used while fuzzing.
pub const FUZZ_FIX_BOUND: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum FailureKind {
    TerminalMismatch { incremental: Terminal, reference: Terminal },
    NotEmbedded(Pointer),
    IncrementalError(String),
    ReferenceError(String),
    IllFormed(Vec<Violation>),
}

/// A failing program with the shortest edit script found to reproduce it.
#[derive(Clone, Debug)]
pub struct Failure {
    pub seed: u64,
    pub program: Computation,
    pub edits: Vec<Edit>,
    /// How many edits had been applied when the check failed.
    pub step: usize,
    pub kind: FailureKind,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {} failed after {} edit(s)", self.seed, self.step)?;
        writeln!(f, "program: {}", self.program)?;
        for (i, e) in self.edits.iter().enumerate() {
            writeln!(f, "edit {}: {} := {}", i + 1, e.target, e.value)?;
        }
        match &self.kind {
            FailureKind::TerminalMismatch { incremental, reference } => {
                writeln!(f, "incremental: {incremental}")?;
                write!(f, "reference:   {reference}")
            }
            FailureKind::NotEmbedded(p) => write!(f, "reference store entry {p} missing from the incremental graph"),
            FailureKind::IncrementalError(e) => write!(f, "incremental error: {e}"),
            FailureKind::ReferenceError(e) => write!(f, "reference error: {e}"),
            FailureKind::IllFormed(vs) => {
                write!(f, "ill-formed graph:")?;
                for v in vs {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Outcome of checking one program.
#[derive(Clone, Debug, Default)]
pub struct CaseRun {
    pub runs: usize,
    pub hits: RuleHits,
}

/// Check one program under one edit script.
pub fn check_program(case: &Case, edits: &[Edit]) -> Result<CaseRun, Failure> {
    let program = case.program();
    let top = Namespace::top();
    let fail = |step: usize, kind| Failure { seed: case.seed, program: program.clone(), edits: edits.to_vec(), step, kind };
    let mut cells = case.initial_cells();
    let mut inc = Incremental::new(case.initial_graph()).with_fix_bound(FUZZ_FIX_BOUND);
    let mut hits = RuleHits::default();
    for step in 0..=edits.len() {
        if step > 0 {
            let edit = &edits[step - 1];
            if let Some(cell) = cells.iter_mut().find(|(p, _)| *p == edit.target) {
                cell.1 = edit.value.clone();
            }
            if let Err(e) = inc.overwrite(&edit.target, edit.value.clone()) {
                return Err(fail(step, FailureKind::IncrementalError(e.to_string())));
            }
        }
        let t_inc = inc.eval(&Pointer::Root, &top, &program).map_err(|e| fail(step, FailureKind::IncrementalError(e.to_string())))?;
        let mut reference = Reference::new(store_of_refs(cells.iter().cloned())).with_fix_bound(FUZZ_FIX_BOUND);
        let t_ref = reference.eval(&top, &program).map_err(|e| fail(step, FailureKind::ReferenceError(e.to_string())))?;
        hits.merge(reference.hits());
        if t_inc != t_ref {
            return Err(fail(step, FailureKind::TerminalMismatch { incremental: t_inc, reference: t_ref }));
        }
        let restricted = restrict(inc.graph(), &domain(inc.graph()));
        if let Some(p) = embedding_gap(reference.store(), &restricted) {
            return Err(fail(step, FailureKind::NotEmbedded(p)));
        }
        let violations = inc.graph().check_well_formed();
        if !violations.is_empty() {
            return Err(fail(step, FailureKind::IllFormed(violations)));
        }
    }
    hits.merge(inc.hits());
    Ok(CaseRun { runs: edits.len() + 1, hits })
}

/// Drop edits while the failure persists.
pub fn minimize(case: &Case, failure: Failure) -> Failure {
    let mut best = failure;
    let mut edits = best.edits.clone();
    let mut i = 0;
    while i < edits.len() {
        let mut shorter = edits.clone();
        shorter.remove(i);
        match check_program(case, &shorter) {
            Err(f) => {
                edits = shorter;
                best = f;
            }
            Ok(_) => i += 1,
        }
    }
    best
}

/// Settings for a batch of generated checks.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seeds: Range<u64>,
    pub size: u32,
    pub edits_per_program: usize,
    pub threads: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seeds: 0..1000, size: 40, edits_per_program: 3, threads: 0 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub programs: usize,
    pub runs: usize,
    pub failures: Vec<Failure>,
    pub hits: RuleHits,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, other: Report) {
        self.programs += other.programs;
        self.runs += other.runs;
        self.failures.extend(other.failures);
        self.hits.merge(&other.hits);
    }
}

fn check_seeds(seeds: impl Iterator<Item = u64>, size: u32, n_edits: usize) -> Report {
    let mut report = Report::default();
    for seed in seeds {
        let case = gen_case(seed, size);
        let edits = case.random_edits(seed, n_edits);
        report.programs += 1;
        match check_program(&case, &edits) {
            Ok(run) => {
                report.runs += run.runs;
                report.hits.merge(&run.hits);
            }
            Err(f) => report.failures.push(minimize(&case, f)),
        }
    }
    report
}

/// Generate one program per seed, edit it, and compare the two systems.
/// Seeds are sharded across threads, each with its own evaluators.
pub fn check_consistency(config: &CheckConfig) -> Report {
    let threads = match config.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let seeds: Vec<u64> = config.seeds.clone().collect();
    let chunk = seeds.len().div_ceil(threads).max(1);
    let mut report = Report::default();
    std::thread::scope(|s| {
        let workers: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                std::thread::Builder::new()
                    .stack_size(256 << 20)
                    .spawn_scoped(s, move || check_seeds(part.iter().copied(), config.size, config.edits_per_program))
                    .expect("spawn checker thread")
            })
            .collect();
        for w in workers {
            report.absorb(w.join().unwrap_or_else(|p| std::panic::resume_unwind(p)));
        }
    });
    report.failures.sort_by_key(|f| f.seed);
    report
}
