//! Running workloads under each mode and recording measurements.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::Instant;

use nominal_collections::list::{
    lazy_filter, lazy_map, lazy_values, list_delete, list_filter, list_insert, list_map, list_of_values, list_replace, list_reverse, values_of,
};
use nominal_collections::tree::{median_of_sorted, sorter, tree_builder, tree_min, tree_sum};
use nominal_collections::{LazyList, List};
use nominal_core::names::reset_fresh_names;
use nominal_core::{ARef, AThunk, Counters, Engine, Mode, Name, BIG_STACK_BYTES};
use nominal_imp::{edit_program, interpret, Cmd, ImpError, Interp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::workload::{validate, Demand, EditKind, Program, ScriptEdit, Workload};

/// The function mapped over lists.
pub fn map_fn(x: i64) -> i64 {
    x.wrapping_mul(3).wrapping_add(1)
}

/// The predicate lists are filtered by.
pub fn filter_fn(x: i64) -> bool {
    x % 2 == 0
}

/// Upper bound (exclusive) of generated input values.
pub const VALUE_RANGE: i64 = 1_000_000;

/// What a run demanded: output values, or the runtime fault an interpreted
/// program stopped with.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    Values(Vec<i64>),
    Fault(String),
}

impl Output {
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// One row of results: the initial run or one edit, under one mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub program: String,
    pub n: usize,
    pub seed: u64,
    pub demand: Demand,
    pub mode: Mode,
    /// `initial` or an edit kind.
    pub edit_kind: String,
    pub edit_pos: Option<usize>,
    /// Index of the step within its mode's run; the initial run is step 0.
    pub step: usize,
    /// Median over trials.
    pub wall_ns: u64,
    /// Counter deltas for the step; `None` on a failed row.
    pub counts: Option<Counters>,
    /// Digest of the demanded output.
    pub output: Option<u64>,
    /// Well-formedness violations seen up to and including this step.
    pub violations: usize,
    pub error: Option<String>,
}

impl Measurement {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn reexec(&self) -> Option<u64> {
        self.counts.map(|c| c.reexec)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchOptions {
    pub modes: Vec<Mode>,
    pub trials: usize,
    /// Check well-formedness after every root-level force.
    pub validate: bool,
    /// Run each mode on its own thread.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { modes: Mode::ALL.to_vec(), trials: 1, validate: false, parallel: false }
    }
}

/// Run with default options over `modes` and `trials`.
pub fn run_bench(w: &Workload, edits: &[ScriptEdit], trials: usize, modes: &[Mode]) -> Vec<Measurement> {
    run_bench_with(w, edits, &BenchOptions { modes: modes.to_vec(), trials, ..BenchOptions::default() })
}

/// For each mode: the initial run, then one row per edit. Rows come out in
/// mode order, then step order.
pub fn run_bench_with(w: &Workload, edits: &[ScriptEdit], opts: &BenchOptions) -> Vec<Measurement> {
    let cell = |mode: Mode| run_mode(w, edits, mode, opts);
    let per_mode: Vec<Vec<Measurement>> = if opts.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = opts
                .modes
                .iter()
                .map(|&m| std::thread::Builder::new().stack_size(BIG_STACK_BYTES).spawn_scoped(s, move || cell(m)).expect("spawn bench thread"))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))).collect()
        })
    } else {
        opts.modes.iter().map(|&m| nominal_core::with_big_stack(move || cell(m))).collect()
    };
    per_mode.into_iter().flatten().collect()
}

struct Step {
    wall_ns: u64,
    counts: Counters,
    output: Output,
    violations: usize,
}

struct Trial {
    steps: Vec<Step>,
    error: Option<String>,
}

fn run_mode(w: &Workload, edits: &[ScriptEdit], mode: Mode, opts: &BenchOptions) -> Vec<Measurement> {
    let row = |step: usize| {
        let (edit_kind, edit_pos) = match step {
            0 => ("initial".to_owned(), None),
            i => (edits[i - 1].kind.to_string(), Some(edits[i - 1].pos)),
        };
        Measurement {
            program: w.program.to_string(),
            n: w.n,
            seed: w.seed,
            demand: w.demand,
            mode,
            edit_kind,
            edit_pos,
            step,
            wall_ns: 0,
            counts: None,
            output: None,
            violations: 0,
            error: None,
        }
    };
    let total = edits.len() + 1;
    if let Err(e) = validate(w, edits) {
        return (0..total).map(|i| Measurement { error: Some(e.to_string()), ..row(i) }).collect();
    }
    let trials: Vec<Trial> = (0..opts.trials.max(1)).map(|_| run_trial(w, edits, mode, opts.validate)).collect();
    let first = &trials[0];
    (0..total)
        .map(|i| {
            let Some(s) = first.steps.get(i) else {
                let msg = first.error.clone().unwrap_or_else(|| "step did not run".to_owned());
                return Measurement { error: Some(msg), ..row(i) };
            };
            let mut walls = Vec::with_capacity(trials.len());
            let mut error = None;
            for (t, trial) in trials.iter().enumerate() {
                match trial.steps.get(i) {
                    Some(o) if o.counts == s.counts && o.output == s.output => walls.push(o.wall_ns),
                    Some(_) => error = Some(format!("trial {t} disagrees with trial 0 on counts or output")),
                    None => error = Some(format!("trial {t} failed: {}", trial.error.clone().unwrap_or_default())),
                }
            }
            walls.sort_unstable();
            let wall_ns = walls.get(walls.len() / 2).copied().unwrap_or(0);
            Measurement { wall_ns, counts: Some(s.counts), output: Some(s.output.digest()), violations: s.violations, error, ..row(i) }
        })
        .collect()
}

fn run_trial(w: &Workload, edits: &[ScriptEdit], mode: Mode, validate: bool) -> Trial {
    reset_fresh_names();
    let mut steps = Vec::new();
    let error = trial_steps(w, edits, mode, validate, &mut steps).err();
    Trial { steps, error }
}

fn trial_steps(w: &Workload, edits: &[ScriptEdit], mode: Mode, validate: bool, steps: &mut Vec<Step>) -> Result<(), String> {
    let mut session: Box<dyn Session> = match &w.program {
        Program::Imp(name) => Box::new(ImpSession::new(name, w.n, mode, validate)?),
        p => Box::new(ListSession::new(p.clone(), w, mode, validate).map_err(|e| e.to_string())?),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed ^ 0x5eed_ed17);
    let values: Vec<i64> = edits.iter().map(|_| rng.random_range(0..VALUE_RANGE)).collect();
    let mut record = |session: &mut dyn Session, edit: Option<(ScriptEdit, i64)>| -> Result<(), String> {
        let c0 = session.engine().counters();
        let t0 = Instant::now();
        if let Some((e, v)) = edit {
            session.apply(e, v)?;
        }
        let output = session.demand()?;
        let wall_ns = t0.elapsed().as_nanos() as u64;
        let counts = session.engine().counters() - c0;
        let expected = session.expected()?;
        if output != expected {
            return Err(format!("output differs from direct computation ({} vs {})", output.digest(), expected.digest()));
        }
        steps.push(Step { wall_ns, counts, output, violations: session.engine().violations().len() });
        Ok(())
    };
    record(session.as_mut(), None)?;
    for (&e, &v) in edits.iter().zip(&values) {
        record(session.as_mut(), Some((e, v)))?;
    }
    Ok(())
}

trait Session {
    fn engine(&self) -> &Engine;
    fn apply(&mut self, edit: ScriptEdit, value: i64) -> Result<(), String>;
    fn demand(&mut self) -> Result<Output, String>;
    /// The output computed directly, without the engine.
    fn expected(&self) -> Result<Output, String>;
}

enum Root {
    List(AThunk<List>),
    Scalar(AThunk<i64>),
    Maybe(AThunk<Option<i64>>),
    Lazy(AThunk<LazyList>),
}

struct ListSession {
    eng: Engine,
    program: Program,
    demand: Demand,
    head: ARef<List>,
    mirror: Vec<i64>,
    root: Root,
}

/// Initial list values for a workload.
pub fn initial_values(w: &Workload) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    (0..w.n).map(|_| rng.random_range(0..VALUE_RANGE)).collect()
}

impl ListSession {
    fn new(program: Program, w: &Workload, mode: Mode, validate: bool) -> nominal_core::engine::Result<ListSession> {
        let mut eng = Engine::new(mode);
        eng.set_validation(validate);
        let mirror = initial_values(w);
        let head = list_of_values(&mut eng, &mirror)?;
        let root = list_root(&mut eng, &program, &head)?;
        Ok(ListSession { eng, program, demand: w.demand, head, mirror, root })
    }
}

/// The outer-layer thunk computing `program` over the list at `head`.
fn list_root(eng: &mut Engine, program: &Program, head: &ARef<List>) -> nominal_core::engine::Result<Root> {
    let seed = Name::root().first();
    let top = Name::root().second();
    let (s_build, s_use) = seed.fork();
    Ok(match program {
        Program::EagerMap => Root::List(list_map(eng, &seed, "x*3+1", map_fn)?.apply(eng, top, head)?),
        Program::EagerFilter => Root::List(list_filter(eng, &seed, "even", filter_fn)?.apply(eng, top, head)?),
        Program::Reverse => Root::List(list_reverse(eng, &seed)?.apply(eng, top, head)?),
        Program::LazyMap => Root::Lazy(lazy_map(eng, &seed, "x*3+1", map_fn)?.apply(eng, top, head)?),
        Program::LazyFilter => Root::Lazy(lazy_filter(eng, &seed, "even", filter_fn)?.apply(eng, top, head)?),
        Program::Min | Program::Sum => {
            let build = tree_builder(eng, &s_build)?;
            let fold = if *program == Program::Min { tree_min(eng, &s_use)? } else { tree_sum(eng, &s_use)? };
            let m = eng.mk_mfn(top.clone(), &format!("{program}-of-list"), move |eng, _, head: ARef<List>| {
                let t = build.apply(eng, Name::root(), &head)?;
                let tree = eng.force(&t)?;
                fold.fold(eng, &tree)
            })?;
            Root::Scalar(eng.thunk(&m, top, head.clone())?)
        }
        Program::Median | Program::Mergesort => {
            let build = tree_builder(eng, &s_build)?;
            let sort = sorter(eng, &s_use)?;
            let (s_median, s_sort) = top.fork();
            if *program == Program::Median {
                let m = eng.mk_mfn(s_median, "median-of-list", move |eng, _, head: ARef<List>| {
                    let t = build.apply(eng, Name::root(), &head)?;
                    let tree = eng.force(&t)?;
                    let sorted = sort.sort_tree(eng, &tree)?;
                    median_of_sorted(eng, &sorted)
                })?;
                Root::Maybe(eng.thunk(&m, top, head.clone())?)
            } else {
                let m = eng.mk_mfn(s_sort, "sort-list", move |eng, _, head: ARef<List>| {
                    let t = build.apply(eng, Name::root(), &head)?;
                    let tree = eng.force(&t)?;
                    sort.sort_tree(eng, &tree)
                })?;
                Root::List(eng.thunk(&m, top, head.clone())?)
            }
        }
        Program::Imp(_) => unreachable!("interpreter programs have their own session"),
    })
}

fn last_only(demand: Demand, mut xs: Vec<i64>) -> Vec<i64> {
    if demand == Demand::One {
        xs = xs.pop().into_iter().collect();
    }
    xs
}

/// What a list program computes, directly.
pub fn list_oracle(program: &Program, demand: Demand, xs: &[i64]) -> Vec<i64> {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let out = match program {
        Program::EagerMap | Program::LazyMap => xs.iter().map(|&x| map_fn(x)).collect(),
        Program::EagerFilter | Program::LazyFilter => xs.iter().copied().filter(|&x| filter_fn(x)).collect(),
        Program::Reverse => xs.iter().rev().copied().collect(),
        Program::Min => vec![xs.iter().copied().min().unwrap_or(i64::MAX)],
        Program::Sum => vec![xs.iter().fold(0i64, |a, &x| a.wrapping_add(x))],
        Program::Median => sorted.get(sorted.len() / 2).copied().into_iter().collect(),
        Program::Mergesort => sorted,
        Program::Imp(_) => Vec::new(),
    };
    last_only(demand, out)
}

impl Session for ListSession {
    fn engine(&self) -> &Engine {
        &self.eng
    }

    fn apply(&mut self, edit: ScriptEdit, value: i64) -> Result<(), String> {
        let (eng, head, p) = (&mut self.eng, &self.head, edit.pos);
        let r = match edit.kind {
            EditKind::Insert => list_insert(eng, head, p, value).map(|()| self.mirror.insert(p, value)),
            EditKind::Delete => list_delete(eng, head, p).map(|()| {
                self.mirror.remove(p);
            }),
            EditKind::Replace => list_replace(eng, head, p, value).map(|()| self.mirror[p] = value),
            EditKind::Swap => {
                let moved = self.mirror[p];
                list_delete(eng, head, p).and_then(|()| list_insert(eng, head, p + 1, moved)).map(|()| self.mirror.swap(p, p + 1))
            }
            EditKind::Ext => {
                let end = self.mirror.len();
                list_insert(eng, head, end, value).map(|()| self.mirror.push(value))
            }
        };
        r.map_err(|e| e.to_string())
    }

    fn demand(&mut self) -> Result<Output, String> {
        let eng = &mut self.eng;
        let xs = match &self.root {
            Root::List(t) => {
                let l = eng.force(t).map_err(|e| e.to_string())?;
                last_only(self.demand, values_of(eng, &l).map_err(|e| e.to_string())?)
            }
            Root::Scalar(t) => vec![eng.force(t).map_err(|e| e.to_string())?],
            Root::Maybe(t) => eng.force(t).map_err(|e| e.to_string())?.into_iter().collect(),
            Root::Lazy(t) => {
                let xs = lazy_values(eng, t).map_err(|e| e.to_string())?;
                last_only(self.demand, xs)
            }
        };
        Ok(Output::Values(xs))
    }

    fn expected(&self) -> Result<Output, String> {
        Ok(Output::Values(list_oracle(&self.program, self.demand, &self.mirror)))
    }
}

struct ImpSession {
    interp: Interp,
    name: String,
    n: u64,
    program: Cmd,
}

impl ImpSession {
    fn new(name: &str, n: usize, mode: Mode, validate: bool) -> Result<ImpSession, String> {
        let program = nominal_imp::programs::program(name, n as u64).ok_or_else(|| format!("unknown program `{name}`"))?;
        let mut interp = Interp::new(mode).map_err(|e| e.to_string())?;
        interp.engine_mut().set_validation(validate);
        Ok(ImpSession { interp, name: name.to_owned(), n: n as u64, program })
    }
}

/// Variable values in name order, then array cells as address/value pairs.
fn flatten(env: &BTreeMap<nominal_imp::Var, i64>, store: &BTreeMap<i64, i64>) -> Vec<i64> {
    env.values().copied().chain(store.iter().flat_map(|(&a, &v)| [a, v])).collect()
}

impl Session for ImpSession {
    fn engine(&self) -> &Engine {
        self.interp.engine()
    }

    fn apply(&mut self, edit: ScriptEdit, _: i64) -> Result<(), String> {
        use nominal_imp::EditKind as K;
        let kind = match edit.kind {
            EditKind::Replace => K::Repl,
            EditKind::Swap => K::Swap,
            EditKind::Ext => K::Ext,
            k @ (EditKind::Insert | EditKind::Delete) => return Err(format!("interpreter programs do not take {k} edits")),
        };
        let e = nominal_imp::programs::standard_edit(&self.name, self.n, kind).ok_or("no standard edit")?;
        self.program = edit_program(&self.program, &e).map_err(|e| e.to_string())?;
        Ok(())
    }

    fn demand(&mut self) -> Result<Output, String> {
        match self.interp.run(&self.program) {
            Ok((f, _)) => Ok(Output::Values(flatten(&f.env, &f.store))),
            Err(ImpError::Runtime(e)) => Ok(Output::Fault(e.to_string())),
            Err(e) => Err(e.to_string()),
        }
    }

    fn expected(&self) -> Result<Output, String> {
        Ok(match interpret(&self.program) {
            Ok(f) => Output::Values(flatten(&f.env, &f.store)),
            Err(e) => Output::Fault(e.to_string()),
        })
    }
}
