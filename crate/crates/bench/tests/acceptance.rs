//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use nominal_bench::{
    even10, mode_mismatches, run_bench_with, script, BenchOptions, EditKind, Measurement, Program, ScriptEdit, Workload,
};
use nominal_calculus::{check_consistency, CheckConfig};
use nominal_collections::list::{cell_identities, list_insert, list_map, list_of_values};
use nominal_collections::trie::{trie_ops, TrieOps, DEFAULT_TRIE_DEPTH};
use nominal_collections::{List, Trie};
use nominal_core::dcg::DcgError;
use nominal_core::{fresh_name, with_big_stack, AThunk, Engine, EngineError, Mode, Name, Pointer};
use nominal_imp::{edit_program, Interp};

struct Verdict {
    pass: bool,
    detail: String,
    /// Well-formedness violations observed while checking.
    violations: usize,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>, violations: usize) -> Verdict {
        Verdict { pass, detail: detail.into(), violations }
    }
}

fn validated(modes: &[Mode]) -> BenchOptions {
    BenchOptions { modes: modes.to_vec(), trials: 1, validate: true, parallel: false }
}

fn edit_rows(ms: &[Measurement], mode: Mode) -> impl Iterator<Item = &Measurement> {
    ms.iter().filter(move |m| m.mode == mode && m.step > 0)
}

fn total_violations(ms: &[Measurement]) -> usize {
    ms.iter().map(|m| m.violations).max().unwrap_or(0)
}

fn failures(ms: &[Measurement]) -> Vec<String> {
    ms.iter().filter_map(|m| m.error.as_ref().map(|e| format!("{} {} step {}: {e}", m.program, m.mode, m.step))).collect()
}

fn map_reuse() -> Verdict {
    let t0 = Instant::now();
    let w = Workload::new(Program::EagerMap, 1000);
    let ms = run_bench_with(&w, &script(&[EditKind::Insert], &even10(1000)), &validated(&[Mode::Nominal, Mode::Structural]));
    let elapsed = t0.elapsed();
    let nominal: Vec<u64> = edit_rows(&ms, Mode::Nominal).filter_map(Measurement::reexec).collect();
    let structural_ok = edit_rows(&ms, Mode::Structural).all(|m| m.reexec().is_some_and(|r| r + 1 >= m.edit_pos.unwrap_or(0) as u64));
    let pass = failures(&ms).is_empty() && nominal.len() == 10 && nominal.iter().all(|&r| r == 2) && structural_ok && elapsed < Duration::from_secs(5);
    let structural: Vec<u64> = edit_rows(&ms, Mode::Structural).filter_map(Measurement::reexec).collect();
    Verdict::new(pass, format!("nominal re-executions {nominal:?}; structural {structural:?}; {elapsed:.2?}"), total_violations(&ms))
}

/// Tail pointers of the output list.
fn output_pointers(eng: &mut Engine, out: &AThunk<List>) -> HashSet<Pointer> {
    let l = eng.force(out).expect("map output");
    cell_identities(eng, &l).expect("output cells").into_iter().map(|(_, p)| p).collect()
}

fn map_allocation_stability() -> Verdict {
    let mut eng = Engine::new(Mode::Nominal);
    eng.set_validation(true);
    let xs: Vec<i64> = (0..1000).collect();
    let head = list_of_values(&mut eng, &xs).expect("input");
    let map = list_map(&mut eng, &Name::root().first(), "x*3+1", nominal_bench::map_fn).expect("map");
    let out = map.apply(&mut eng, Name::root().second(), &head).expect("root");
    let mut before = output_pointers(&mut eng, &out);
    let mut worst = 0;
    let mut pass = true;
    for (k, pos) in even10(1000).into_iter().enumerate() {
        let pos = pos + k;
        list_insert(&mut eng, &head, pos, -1).expect("insert");
        let inserted = cell_identities(&eng, &eng.peek(&head).expect("head")).expect("input cells")[pos].0.clone();
        let after = output_pointers(&mut eng, &out);
        let added: Vec<&Pointer> = after.difference(&before).collect();
        worst = worst.max(added.len());
        pass &= before.is_subset(&after)
            && added.len() <= 2
            && added.iter().all(|p| p.name().is_some_and(|n| n.descends_from(&inserted)));
        before = after;
    }
    Verdict::new(pass, format!("at most {worst} new output pointers per insert, all derived from the inserted cell"), eng.violations().len())
}

fn fold_repair() -> Verdict {
    let t0 = Instant::now();
    let mut maxima = Vec::new();
    let mut violations = 0;
    let mut pass = true;
    for log_n in [8u32, 10, 12] {
        let n = 1usize << log_n;
        let ms = run_bench_with(&Workload::new(Program::Min, n), &script(&[EditKind::Replace], &even10(n)), &validated(&[Mode::Nominal]));
        violations += total_violations(&ms);
        pass &= failures(&ms).is_empty();
        let worst = edit_rows(&ms, Mode::Nominal).filter_map(Measurement::reexec).max().unwrap_or(u64::MAX);
        pass &= worst <= 6 * log_n as u64;
        maxima.push(worst);
    }
    let growth = maxima[2] as f64 / maxima[0].max(1) as f64;
    let elapsed = t0.elapsed();
    pass &= growth <= 2.0 && elapsed < Duration::from_secs(30);
    Verdict::new(pass, format!("worst re-executions at n=2^8,2^10,2^12: {maxima:?}; growth {growth:.2}; {elapsed:.2?}"), violations)
}

fn calculus_consistency() -> Verdict {
    let t0 = Instant::now();
    let report = check_consistency(&CheckConfig { seeds: 0..1000, edits_per_program: 3, ..CheckConfig::default() });
    let elapsed = t0.elapsed();
    let pass = report.passed() && report.programs == 1000 && elapsed < Duration::from_secs(60);
    let first = report.failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default();
    // Ill-formed graphs are reported as checker failures.
    let ill_formed = report.failures.iter().filter(|f| f.to_string().contains("well")).count();
    Verdict::new(pass, format!("{} programs, {} runs, {} failures, {elapsed:.2?}{first}", report.programs, report.runs, report.failures.len()), ill_formed)
}

fn is_ambiguous(r: Result<(), EngineError>) -> bool {
    matches!(r, Err(EngineError::Graph(DcgError::AmbiguousName { .. })))
}

/// A body that allocates two reference cells under one name.
fn twice_ref(variant: i64) -> Result<(), EngineError> {
    let mut eng = Engine::new(Mode::Nominal);
    let m = eng.mk_mfn(Name::root(), "two-refs", move |eng, _, k: Name| {
        eng.aref(k.clone(), variant)?;
        eng.aref(k, variant + 1)?;
        Ok(())
    })?;
    let k = (0..variant).fold(Name::root().first(), |n, _| n.second());
    let t = eng.thunk(&m, fresh_name(), k)?;
    eng.force(&t)
}

/// A body that allocates two thunks of one function under one name.
fn twice_thunk(variant: i64) -> Result<(), EngineError> {
    let mut eng = Engine::new(Mode::Nominal);
    let (s_leaf, s_top) = Name::root().fork();
    let leaf = eng.mk_mfn(s_leaf, "leaf", |_, _, x: i64| Ok(x))?;
    let m = eng.mk_mfn(s_top, "two-thunks", move |eng, _, k: Name| {
        let a = eng.thunk(&leaf, k.clone(), variant)?;
        if variant % 2 == 0 {
            eng.force(&a)?;
        }
        eng.thunk(&leaf, k, variant + 1)?;
        Ok(())
    })?;
    let t = eng.thunk(&m, Name::root(), Name::root().first().first())?;
    eng.force(&t)
}

/// Two functions each allocate a thunk of a shared helper under the same
/// name, with different arguments, inside one demand.
fn cross_function(variant: i64) -> Result<(), EngineError> {
    let mut eng = Engine::new(Mode::Nominal);
    let (s_helper, s_f, s_g, s_top) = Name::root().fork4();
    let helper = eng.mk_mfn(s_helper, "helper", |_, _, x: i64| Ok(x * 2))?;
    let (h1, h2) = (helper.clone(), helper);
    let f = eng.mk_mfn(s_f, "f", move |eng, _, k: Name| {
        let t = eng.thunk(&h1, k, variant)?;
        eng.force(&t)
    })?;
    let g = eng.mk_mfn(s_g, "g", move |eng, _, k: Name| {
        let t = eng.thunk(&h2, k, variant + 100)?;
        eng.force(&t)
    })?;
    let top = eng.mk_mfn(s_top, "both", move |eng, _, k: Name| {
        let a = eng.thunk(&f, Name::root().first(), k.clone())?;
        let b = eng.thunk(&g, Name::root().second(), k)?;
        Ok(eng.force(&a)? + eng.force(&b)?)
    })?;
    let t = eng.thunk(&top, Name::root(), fresh_name())?;
    eng.force(&t).map(|_| ())
}

/// Sibling thunks of one function write the same cell name with different
/// contents.
fn sibling_cells(variant: i64) -> Result<(), EngineError> {
    let mut eng = Engine::new(Mode::Nominal);
    let (s_child, s_top) = Name::root().fork();
    let child = eng.mk_mfn(s_child, "child", |eng, _, (k, v): (Name, i64)| {
        let r = eng.aref(k, v)?;
        eng.get(&r)
    })?;
    let top = eng.mk_mfn(s_top, "parent", move |eng, _, k: Name| {
        let mut sum = 0;
        for i in 0..=variant {
            let t = eng.thunk(&child, fresh_name(), (k.clone(), i))?;
            sum += eng.force(&t)?;
        }
        Ok(sum)
    })?;
    let t = eng.thunk(&top, Name::root(), Name::root().second())?;
    eng.force(&t).map(|_| ())
}

fn benchmark_suite_failures() -> Vec<String> {
    let mut out = Vec::new();
    for program in Program::all() {
        let (n, kinds): (usize, &[EditKind]) = match &program {
            Program::Imp(name) if name == "matmult" => (4, &[EditKind::Replace, EditKind::Swap, EditKind::Ext]),
            Program::Imp(_) => (50, &[EditKind::Replace, EditKind::Swap, EditKind::Ext]),
            _ => (300, &EditKind::ALL),
        };
        let positions = if program.is_imp() { vec![0] } else { even10(n) };
        let ms = run_bench_with(&Workload::new(program, n), &script(kinds, &positions), &validated(&[Mode::Nominal]));
        out.extend(failures(&ms));
    }
    out
}

fn ambiguity_detection() -> Verdict {
    let mut raised = 0;
    let mut total = 0;
    let builders: [fn(i64) -> Result<(), EngineError>; 4] = [twice_ref, twice_thunk, cross_function, sibling_cells];
    for build in builders {
        for variant in 1..=5 {
            total += 1;
            raised += usize::from(is_ambiguous(build(variant)));
        }
    }
    let suite = with_big_stack(benchmark_suite_failures);
    let ambiguous = suite.iter().filter(|e| e.contains("ambiguous")).count();
    let pass = raised == total && total == 20 && suite.is_empty();
    let first = suite.first().map(|e| format!("; {e}")).unwrap_or_default();
    Verdict::new(pass, format!("{raised}/{total} double-use programs rejected; benchmark suite: {ambiguous} ambiguous, {} failed{first}", suite.len()), 0)
}

fn path_sets(eng: &mut Engine, ops: &TrieOps<i64, i64>, names: &[Name], keys: &[i64]) -> Vec<HashSet<Pointer>> {
    let mut t: Trie<i64, i64> = Trie::Nil;
    let mut out = Vec::new();
    for (nm, &k) in names.iter().zip(keys) {
        t = ops.extend(eng, nm.clone(), &t, k, k).expect("extend");
        out.push(ops.path_pointers(eng, &t, &k).expect("path").into_iter().collect());
    }
    out
}

fn trie_independence() -> Verdict {
    let keys = [101i64, 202, 303, 404, 505, 606];
    let names: Vec<Name> = (0..6).map(|_| fresh_name()).collect();
    let mut eng = Engine::new(Mode::Nominal);
    eng.set_validation(true);
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", DEFAULT_TRIE_DEPTH).expect("trie");
    let full = path_sets(&mut eng, &ops, &names, &keys);
    let tail = path_sets(&mut eng, &ops, &names[1..], &keys[1..]);
    let pass = full[1..] == tail[..];
    let sizes: Vec<usize> = tail.iter().map(HashSet::len).collect();
    Verdict::new(pass, format!("paths for v2..v6 identical in both runs (sizes {sizes:?})"), eng.violations().len())
}

fn imp_constant_repair() -> Verdict {
    let t0 = Instant::now();
    let mut ks = Vec::new();
    let mut violations = 0;
    for n in [100u64, 1000, 5000] {
        let (k, v) = with_big_stack(move || {
            let program = nominal_imp::programs::program("fact", n).expect("fact");
            let edit = nominal_imp::programs::standard_edit("fact", n, nominal_imp::EditKind::Repl).expect("edit");
            let edited = edit_program(&program, &edit).expect("edit applies");
            let mut interp = Interp::new(Mode::Nominal).expect("interpreter");
            interp.engine_mut().set_validation(true);
            interp.run(&program).expect("initial run");
            let (_, stats) = interp.run(&edited).expect("edited run");
            (stats.eval_runs, interp.engine().violations().len())
        });
        ks.push(k);
        violations += v;
    }
    let elapsed = t0.elapsed();
    let pass = ks.iter().all(|&k| k == ks[0] && k <= 10) && elapsed < Duration::from_secs(30);
    Verdict::new(pass, format!("re-executed evaluations at n=100,1000,5000: {ks:?}; {elapsed:.2?}"), violations)
}

fn imp_oracle_equivalence() -> Verdict {
    let mut runs = 0;
    let mut problems = Vec::new();
    let mut violations = 0;
    for name in nominal_imp::programs::PROGRAMS {
        let n = if name == "matmult" { 6 } else { 120 };
        let kinds = [EditKind::Replace, EditKind::Swap, EditKind::Ext];
        // Each kind alone, then all kinds stacked.
        let mut scripts: Vec<Vec<ScriptEdit>> = kinds.iter().map(|&kind| vec![ScriptEdit { kind, pos: 0 }]).collect();
        scripts.push(script(&kinds, &[0]));
        for edits in scripts {
            let ms = run_bench_with(&Workload::new(Program::Imp(name.to_owned()), n), &edits, &validated(&Mode::ALL));
            runs += ms.len();
            violations += Mode::ALL.iter().map(|&m| total_violations(&ms.iter().filter(|r| r.mode == m).cloned().collect::<Vec<_>>())).sum::<usize>();
            problems.extend(failures(&ms));
            problems.extend(mode_mismatches(&ms));
        }
    }
    let pass = problems.is_empty();
    let first = problems.first().map(|p| format!("; {p}")).unwrap_or_default();
    Verdict::new(pass, format!("{runs} runs matched the direct interpreter, {} mismatches{first}", problems.len()), violations)
}

fn wall_total(ms: &[Measurement], mode: Mode) -> u64 {
    edit_rows(ms, mode).map(|m| m.wall_ns).sum()
}

fn directional_wall_clock() -> Verdict {
    let t0 = Instant::now();
    let n = 100_000;
    let opts = BenchOptions { modes: vec![Mode::Nominal, Mode::FromScratch], trials: 3, validate: false, parallel: false };
    let mut pass = true;
    let mut parts = Vec::new();
    for (program, kind, check) in [
        (Program::Min, EditKind::Replace, (|r: f64| r >= 5.0) as fn(f64) -> bool),
        (Program::Sum, EditKind::Replace, |r| r >= 5.0),
        (Program::EagerMap, EditKind::Insert, |r| r >= 1.0 / 1.2),
    ] {
        let ms = run_bench_with(&Workload::new(program.clone(), n), &script(&[kind], &even10(n)), &opts);
        let ratio = wall_total(&ms, Mode::FromScratch) as f64 / wall_total(&ms, Mode::Nominal).max(1) as f64;
        pass &= failures(&ms).is_empty() && check(ratio);
        parts.push(format!("{program} {kind} from-scratch/nominal {ratio:.2}x"));
    }
    let elapsed = t0.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    Verdict::new(pass, format!("{}; {elapsed:.2?}", parts.join(", ")), 0)
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 8] = [
        (1, map_reuse),
        (2, map_allocation_stability),
        (3, fold_repair),
        (4, calculus_consistency),
        (5, ambiguity_detection),
        (6, trie_independence),
        (7, imp_constant_repair),
        (8, imp_oracle_equivalence),
    ];
    let mut failed = Vec::new();
    let mut violations = 0;
    let mut report = |id: u32, v: &Verdict| {
        println!("criterion {id}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(id);
        }
    };
    for (id, run) in criteria {
        let v = run();
        violations += v.violations;
        report(id, &v);
    }
    report(9, &Verdict::new(violations == 0, format!("{violations} well-formedness violations across criteria 1 to 8"), 0));
    report(10, &directional_wall_clock());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
