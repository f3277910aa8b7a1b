use nominal_calculus::check::{check_program, FUZZ_FIX_BOUND};
use nominal_calculus::*;
use nominal_core::{Namespace, Pointer};
use proptest::prelude::*;

fn top() -> Namespace {
    Namespace::top()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>(), size in 1u32..60) {
        let e = gen_program(seed, size);
        let text = e.to_string();
        prop_assert_eq!(parse_computation(&text).map_err(|err| TestCaseError::fail(format!("{err}\n{text}")))?, e);
    }

    #[test]
    fn generated_values_round_trip(seed in any::<u64>(), size in 1u32..40) {
        for input in gen_case(seed, size).inputs {
            prop_assert_eq!(parse_value(&input.value.to_string()).unwrap(), input.value);
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), size in 1u32..60) {
        let a = gen_case(seed, size);
        let b = gen_case(seed, size);
        prop_assert_eq!(a.program(), b.program());
        prop_assert_eq!(a.initial_cells(), b.initial_cells());
        prop_assert_eq!(a.random_edits(seed, 4), b.random_edits(seed, 4));
    }

    #[test]
    fn both_evaluators_are_deterministic(seed in any::<u64>(), size in 1u32..50) {
        let case = gen_case(seed, size);
        let run_ref = || {
            let mut r = Reference::new(case.initial_store()).with_fix_bound(FUZZ_FIX_BOUND);
            let t = r.eval(&top(), &case.program()).unwrap();
            (t, r.into_store())
        };
        prop_assert_eq!(run_ref(), run_ref());
        let run_inc = || {
            let mut i = Incremental::new(case.initial_graph()).with_fix_bound(FUZZ_FIX_BOUND);
            let t = i.eval(&Pointer::Root, &top(), &case.program()).unwrap();
            (t, restrict(i.graph(), &domain(i.graph())), i.hits().clone())
        };
        prop_assert_eq!(run_inc(), run_inc());
    }

    #[test]
    fn the_reference_store_only_grows(seed in any::<u64>(), size in 1u32..50) {
        let case = gen_case(seed, size);
        let initial = case.initial_store();
        let mut r = Reference::new(initial.clone()).with_fix_bound(FUZZ_FIX_BOUND);
        r.eval(&top(), &case.program()).unwrap();
        prop_assert_eq!(embedding_gap(&initial, r.store()), None);
    }

    #[test]
    fn generated_programs_agree_under_edits(seed in any::<u64>(), size in 1u32..50, n in 0usize..5) {
        let case = gen_case(seed, size);
        let edits = case.random_edits(seed ^ 0x9e37, n);
        if let Err(f) = check_program(&case, &edits) {
            prop_assert!(false, "{}", f);
        }
    }
}

fn closed(v: &Value) -> bool {
    match v {
        Value::Var(_) => false,
        Value::Pair(a, b) => closed(a) && closed(b),
        Value::Inj(_, a) => closed(a),
        Value::Name(_) | Value::Ref(_) | Value::Thk(_) | Value::Ns(_) => true,
    }
}

#[test]
fn the_smallest_program_returns_a_closed_value() {
    let e = gen_program(0, 1);
    let Computation::Term(Terminal::Ret(v)) = &e else { panic!("expected a return, got {e}") };
    assert!(closed(v), "{v}");
    let (_, t) = eval_ref(PlainStore::new(), &top(), &e).unwrap();
    assert_eq!(t, Terminal::Ret(v.clone()));
}

#[test]
fn ten_thousand_generated_programs_never_get_stuck() {
    let mut seen = 0;
    for seed in 0..10_000u64 {
        let case = gen_case(seed, 1 + (seed % 48) as u32);
        let mut r = Reference::new(case.initial_store()).with_fix_bound(FUZZ_FIX_BOUND);
        if let Err(e) = r.eval(&top(), &case.program()) {
            panic!("seed {seed}: {e}\n{}", case.program());
        }
        seen += 1;
    }
    assert_eq!(seen, 10_000);
}

#[test]
fn a_batch_of_generated_programs_passes_the_checker() {
    let report = check_consistency(&CheckConfig { seeds: 5_000..5_200, ..CheckConfig::default() });
    assert_eq!(report.programs, 200);
    assert_eq!(report.runs, 800);
    let text: Vec<String> = report.failures.iter().map(|f| f.to_string()).collect();
    assert!(report.passed(), "{}", text.join("\n\n"));
}

/// Overwriting inputs without dirtying their readers must be caught.
#[test]
fn the_checker_notices_unrecorded_writes() {
    let mut caught = 0;
    for seed in 0..200u64 {
        let case = gen_case(seed, 40);
        let program = case.program();
        let mut inc = Incremental::new(case.initial_graph()).with_fix_bound(FUZZ_FIX_BOUND);
        inc.eval(&Pointer::Root, &top(), &program).unwrap();
        let mut cells = case.initial_cells();
        for edit in case.random_edits(seed, 3) {
            inc.graph_mut().put_ref_untracked(&edit.target, edit.value.clone()).unwrap();
            for cell in cells.iter_mut().filter(|(p, _)| *p == edit.target) {
                cell.1 = edit.value.clone();
            }
        }
        let stale = inc.eval(&Pointer::Root, &top(), &program).unwrap();
        let fresh = Reference::new(store_of_refs(cells)).with_fix_bound(FUZZ_FIX_BOUND).eval(&top(), &program).unwrap();
        if stale != fresh {
            caught += 1;
        }
    }
    assert!(caught > 0);
}
