use nominal_bench::*;
use nominal_core::{Counters, Mode};
use proptest::prelude::*;

fn row(program: &str, mode: Mode, edit_kind: &str, wall_ns: u64) -> Measurement {
    Measurement {
        program: program.to_owned(),
        n: 100,
        seed: 0,
        demand: Demand::All,
        mode,
        edit_kind: edit_kind.to_owned(),
        edit_pos: Some(5),
        step: 1,
        wall_ns,
        counts: Some(Counters { reexec: 3, hits: 4, allocations: 5, dirtied: 6 }),
        output: Some(1),
        violations: 0,
        error: None,
    }
}

fn nominal_only() -> BenchOptions {
    BenchOptions { modes: vec![Mode::Nominal], ..BenchOptions::default() }
}

#[test]
fn empty_input_gives_the_header_alone() {
    assert_eq!(emit_csv(&[]), format!("{}\n", CSV_HEADER.join(",")));
    assert_eq!(CSV_HEADER.join(","), "program,n,seed,demand,mode,edit_kind,edit_pos,wall_ns,reexec,alloc,hits,dirtied");
}

#[test]
fn three_measurements_give_four_lines() {
    let ms = vec![row("min", Mode::Nominal, "replace", 10), row("min", Mode::Structural, "replace", 20), row("min", Mode::FromScratch, "replace", 30)];
    let text = emit_csv(&ms);
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().nth(1), Some("min,100,0,all,nominal,replace,5,10,3,5,4,6"));
}

#[test]
fn reemission_is_byte_identical() {
    let w = Workload::new(Program::EagerFilter, 200);
    let ms = run_bench(&w, &script(&[EditKind::Insert, EditKind::Delete], &even10(200)), 1, &Mode::ALL);
    let text = emit_csv(&ms);
    assert_eq!(emit_csv(&parse_csv(&text).unwrap()), text);
    assert_eq!(emit_csv(&ms), text);
}

#[test]
fn failed_rows_leave_numbers_empty() {
    let mut m = row("sum", Mode::Nominal, "delete", 10);
    m.error = Some("boom".to_owned());
    let text = emit_csv(&[m]);
    assert_eq!(text.lines().nth(1), Some("sum,100,0,all,nominal,delete,5,,,,,"));
    assert!(parse_csv(&text).unwrap()[0].failed());
}

#[test]
fn identical_times_give_ratio_one() {
    let ms = vec![row("min", Mode::FromScratch, "replace", 1_000_000), row("min", Mode::Nominal, "replace", 1_000_000)];
    let table = speedup_table(&ms).unwrap();
    let line = table.lines().nth(1).unwrap();
    assert!(line.ends_with("1.00"), "{table}");
    assert!(line.contains("1.000"), "{table}");
}

#[test]
fn half_the_time_gives_ratio_two() {
    let ms = vec![
        row("min", Mode::FromScratch, "replace", 4_000_000),
        row("min", Mode::Structural, "replace", 4_000_000),
        row("min", Mode::Nominal, "replace", 2_000_000),
    ];
    let table = speedup_table(&ms).unwrap();
    let cols: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(cols, ["min", "100", "replace", "4.000", "1.00", "2.00"]);
}

#[test]
fn a_missing_from_scratch_row_is_an_error() {
    let ms = vec![row("min", Mode::Nominal, "replace", 10)];
    assert!(matches!(speedup_table(&ms), Err(ReportError::MissingBaseline { .. })));
}

#[test]
fn from_scratch_runs_every_step() {
    let n = 500;
    let ms = run_bench(&Workload::new(Program::EagerMap, n), &script(&[EditKind::Insert], &[10]), 1, &[Mode::FromScratch]);
    // One step per cell plus the start thunk.
    assert_eq!(ms[0].reexec(), Some(n as u64 + 1));
    assert_eq!(ms[1].reexec(), Some(n as u64 + 2));
}

#[test]
fn counts_are_identical_across_trials_and_runs() {
    let w = Workload { seed: 9, ..Workload::new(Program::Median, 300) };
    let edits = script(&[EditKind::Replace, EditKind::Swap], &even10(300));
    let a = run_bench(&w, &edits, 3, &Mode::ALL);
    let b = run_bench(&w, &edits, 3, &Mode::ALL);
    assert!(a.iter().all(|m| !m.failed()), "{:?}", a.iter().find(|m| m.failed()));
    let counts = |ms: &[Measurement]| ms.iter().map(|m| (m.counts, m.output)).collect::<Vec<_>>();
    assert_eq!(counts(&a), counts(&b));
}

#[test]
fn insert_then_delete_restores_the_output() {
    for program in Program::LISTS {
        let ms = run_bench(&Workload::new(program.clone(), 150), &script(&[EditKind::Insert, EditKind::Delete], &even10(150)), 1, &[Mode::Nominal]);
        let initial = ms[0].output;
        for m in ms.iter().filter(|m| m.edit_kind == "delete") {
            assert_eq!(m.output, initial, "{program} after {m:?}");
        }
    }
}

#[test]
fn every_program_agrees_across_modes() {
    nominal_core::with_big_stack(|| {
        for program in Program::all() {
            let (n, kinds): (usize, &[EditKind]) = match &program {
                Program::Imp(name) if name == "matmult" => (4, &[EditKind::Replace, EditKind::Swap, EditKind::Ext]),
                Program::Imp(_) => (40, &[EditKind::Replace, EditKind::Swap, EditKind::Ext]),
                _ => (120, &EditKind::ALL),
            };
            for demand in [Demand::All, Demand::One] {
                let positions = if program.is_imp() { vec![0] } else { even10(n) };
                let w = Workload { demand, ..Workload::new(program.clone(), n) };
                let ms = run_bench(&w, &script(kinds, &positions), 1, &Mode::ALL);
                assert_eq!(ms.len(), 3 * (1 + kinds.len() * positions.len()));
                assert!(mode_mismatches(&ms).is_empty(), "{program}: {:?}", mode_mismatches(&ms));
            }
        }
    });
}

#[test]
fn demanding_the_last_element_costs_no_more_than_demanding_all() {
    let n = 400;
    let edits = script(&[EditKind::Replace], &[n - 1]);
    let run = |demand| {
        let w = Workload { demand, ..Workload::new(Program::LazyMap, n) };
        run_bench_with(&w, &edits, &nominal_only())[1].reexec().unwrap()
    };
    assert!(run(Demand::One) <= run(Demand::All));
}

#[test]
fn nominal_map_reexecutes_two_steps_per_insert() {
    let ms = run_bench_with(&Workload::new(Program::EagerMap, 1000), &script(&[EditKind::Insert], &even10(1000)), &nominal_only());
    assert!(ms[1..].iter().all(|m| m.reexec() == Some(2)));
}

#[test]
fn bad_positions_fail_every_row() {
    let w = Workload::new(Program::Sum, 10);
    let ms = run_bench(&w, &script(&[EditKind::Delete], &[10]), 1, &[Mode::Nominal]);
    assert_eq!(ms.len(), 2);
    assert!(ms.iter().all(Measurement::failed));
    assert!(matches!(validate(&w, &script(&[EditKind::Swap], &[9])), Err(WorkloadError::BadPosition { .. })));
    assert!(matches!(validate(&Workload::new(Program::Sum, 0), &[]), Err(WorkloadError::EmptyInput)));
    let imp = Workload::new("imp:fact".parse().unwrap(), 10);
    assert!(matches!(validate(&imp, &script(&[EditKind::Insert], &[0])), Err(WorkloadError::Unsupported { .. })));
}

#[test]
fn parsing_names_and_positions() {
    for p in Program::all() {
        assert_eq!(p.to_string().parse::<Program>().unwrap(), p);
    }
    assert_eq!("map".parse::<Program>().unwrap(), Program::EagerMap);
    assert_eq!("filter".parse::<Program>().unwrap(), Program::EagerFilter);
    assert!("imp:nope".parse::<Program>().is_err());
    assert!("quickhull".parse::<Program>().is_err());
    assert_eq!("repl".parse::<EditKind>().unwrap(), EditKind::Replace);
    assert_eq!(even10(1000), [50, 150, 250, 350, 450, 550, 650, 750, 850, 950]);
    assert_eq!(parse_positions("even10", 20).unwrap(), even10(20));
    assert_eq!(parse_positions("3, 1,4", 20).unwrap(), [3, 1, 4]);
    assert!(parse_positions("x", 20).is_err());
    let s = script(&[EditKind::Insert, EditKind::Delete], &[1, 2]);
    assert_eq!(s.iter().map(ToString::to_string).collect::<Vec<_>>(), ["insert@1", "delete@1", "insert@2", "delete@2"]);
}

#[test]
fn the_list_oracle() {
    let xs = [5, 2, 8, 1];
    assert_eq!(list_oracle(&Program::EagerMap, Demand::All, &xs), [16, 7, 25, 4]);
    assert_eq!(list_oracle(&Program::LazyFilter, Demand::All, &xs), [2, 8]);
    assert_eq!(list_oracle(&Program::LazyFilter, Demand::One, &xs), [8]);
    assert_eq!(list_oracle(&Program::Reverse, Demand::All, &xs), [1, 8, 2, 5]);
    assert_eq!(list_oracle(&Program::Min, Demand::All, &xs), [1]);
    assert_eq!(list_oracle(&Program::Sum, Demand::All, &xs), [16]);
    assert_eq!(list_oracle(&Program::Median, Demand::All, &xs), [5]);
    assert_eq!(list_oracle(&Program::Mergesort, Demand::All, &xs), [1, 2, 5, 8]);
}

fn edit_strategy() -> impl Strategy<Value = (EditKind, usize)> {
    (prop::sample::select(EditKind::ALL.to_vec()), 0usize..1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random edit sequences on every list program: each mode matches the
    /// direct computation (checked inside the runner) and the others.
    #[test]
    fn random_scripts_agree(
        program in prop::sample::select(Program::LISTS.to_vec()),
        n in 1usize..80,
        seed in any::<u64>(),
        raw in prop::collection::vec(edit_strategy(), 0..12),
        one in any::<bool>(),
    ) {
        let mut len = n;
        let mut edits = Vec::new();
        for (kind, p) in raw {
            let pos = match kind {
                EditKind::Insert => p % (len + 1),
                EditKind::Delete if len > 1 => p % len,
                EditKind::Replace => p % len,
                EditKind::Swap if len > 1 => p % (len - 1),
                EditKind::Ext => len,
                _ => continue,
            };
            match kind {
                EditKind::Insert | EditKind::Ext => len += 1,
                EditKind::Delete => len -= 1,
                _ => {}
            }
            edits.push(ScriptEdit { kind, pos });
        }
        let demand = if one { Demand::One } else { Demand::All };
        let w = Workload { program, n, seed, demand };
        let ms = run_bench_with(&w, &edits, &BenchOptions { validate: true, ..BenchOptions::default() });
        prop_assert!(ms.iter().all(|m| !m.failed()), "{:?}", ms.iter().find(|m| m.failed()));
        prop_assert!(mode_mismatches(&ms).is_empty());
        prop_assert!(ms.iter().all(|m| m.violations == 0));
    }
}

#[test]
fn the_command_line_writes_csv_and_tables() {
    let dir = std::env::temp_dir().join(format!("bench-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("out.csv");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["run", "--program", "map", "--n", "200", "--edits", "insert,delete,replace", "--positions", "even10"])
        .args(["--modes", "nominal,structural,fromscratch", "--trials", "2", "--csv"])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 31);
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_bench")).arg("table").arg(&csv).output().unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 4, "{table}");
    std::fs::remove_dir_all(&dir).unwrap();
}
