use nominal_core::{with_big_stack, Mode};
use nominal_imp::ast::position_label;
use nominal_imp::programs::{program, standard_edit, PROGRAMS};
use nominal_imp::*;

fn run_all_modes(p: &Cmd) -> Vec<Result<Final, ImpError>> {
    Mode::ALL.iter().map(|&m| Interp::new(m).unwrap().run(p).map(|(f, _)| f)).collect()
}

fn env(f: &Final, x: &str) -> i64 {
    f.env[x]
}

#[test]
fn skip_parses_to_skip() {
    let c = parse("skip;").unwrap();
    assert_eq!(c.kind, CmdKind::Skip);
    assert_eq!(c.label, position_label(0));
}

#[test]
fn two_assignments_form_a_sequence() {
    let c = parse("x := 1; y := x + 1;").unwrap();
    let CmdKind::Seq(a, b) = &c.kind else { panic!("{c:?}") };
    assert_eq!(a.kind, CmdKind::Assign("x".into(), AExp::Lit(1)));
    assert_eq!(b.kind, CmdKind::Assign("y".into(), AExp::Add(Box::new(AExp::Var("x".into())), Box::new(AExp::Lit(1)))));
    assert_eq!(c.labels(), (0..3).map(position_label).collect::<Vec<_>>());
}

#[test]
fn parsing_is_deterministic() {
    let src = programs::source("matmult", 3).unwrap();
    assert_eq!(parse(&src).unwrap(), parse(&src).unwrap());
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse("x := 1;\ny := ;").unwrap_err();
    assert_eq!((e.line, e.column), (2, 6));
    let e = parse("while (x < 1) { x := 1;").unwrap_err();
    assert_eq!(e.line, 1);
    assert!(parse("x := 99999999999999999999;").is_err());
    assert!(parse("x := 1 $ 2;").is_err());
}

#[test]
fn precedence_and_parenthesized_guards() {
    let f = interpret(&parse("a := 2 + 3 * 4 - 6 / 2; b := -(a) - -3; if ((a > 1) && !(b == 0) || false) { c := 1; } else { c := 2; }").unwrap()).unwrap();
    assert_eq!((env(&f, "a"), env(&f, "b"), env(&f, "c")), (11, -8, 1));
}

#[test]
fn factorial_of_five() {
    let p = parse("r := 1; i := 1; while (i <= 5) { r := r * i; i := i + 1; }").unwrap();
    let expected: i64 = (1..=5).product();
    for f in run_all_modes(&p) {
        assert_eq!(env(&f.unwrap(), "r"), expected);
    }
}

#[test]
fn maximum_of_a_literal_array() {
    let p = parse(
        "a := array(5); a[0] := 3; a[1] := 1; a[2] := 4; a[3] := 1; a[4] := 5;
         m := a[0]; j := 1;
         while (j < 5) { t := a[j]; if (t > m) { m := t; } j := j + 1; }",
    )
    .unwrap();
    for f in run_all_modes(&p) {
        let f = f.unwrap();
        assert_eq!(env(&f, "m"), 5);
        assert_eq!(f.array("a"), Some(vec![3, 1, 4, 1, 5]));
    }
}

#[test]
fn runtime_errors_match_the_oracle() {
    let cases = [
        ("x := 1 / 0;", RuntimeError::DivisionByZero),
        ("x := y;", RuntimeError::Unbound("y".into())),
        ("a := array(2); a[2] := 1;", RuntimeError::OutOfBounds { array: "a".into(), index: 2, len: 2 }),
        ("a := 3; x := a[0];", RuntimeError::NotAnArray("a".into())),
        ("a := array(0 - 1);", RuntimeError::NegativeLength(-1)),
    ];
    for (src, err) in cases {
        let p = parse(src).unwrap();
        assert_eq!(interpret(&p).unwrap_err(), err, "{src}");
        for r in run_all_modes(&p) {
            assert_eq!(r.unwrap_err(), ImpError::Runtime(err.clone()), "{src}");
        }
    }
}

#[test]
fn swapping_independent_assignments_keeps_the_result() {
    let p = parse("x := 1; y := 2; z := x + y;").unwrap();
    let q = edit_program(&p, &"swap@1".parse().unwrap()).unwrap();
    assert_eq!(q.statements()[0].label, p.statements()[1].label);
    let (a, b) = (interpret(&p).unwrap(), interpret(&q).unwrap());
    assert_eq!(a, b);
    let mut interp = Interp::new(Mode::Nominal).unwrap();
    assert_eq!(interp.run(&p).unwrap().0, a);
    let (after, stats) = interp.run(&q).unwrap();
    assert_eq!(after, b);
    assert!(stats.eval_runs <= 5, "{stats:?}");
}

#[test]
fn edit_specs_round_trip() {
    for spec in ["repl@3.1=42", "swap@2", "ext@loop1=+500", "ext@2.2.1=-3", "repl@1=-7"] {
        let e: Edit = spec.parse().unwrap();
        assert_eq!(e.to_string(), spec);
    }
    for bad in ["repl@3", "swap@0", "ext@loop0=+1", "grow@1=2", "repl@x=1", "swap@1=2"] {
        assert!(bad.parse::<Edit>().is_err(), "{bad}");
    }
}

#[test]
fn edits_address_nested_statements() {
    let p = parse("i := 0; while (i < 3) { if (i == 1) { x := 1; y := 2; } else { x := 5; } i := i + 1; }").unwrap();
    let q = edit_program(&p, &"repl@2.1.2.1=9".parse().unwrap()).unwrap();
    assert_eq!(env(&interpret(&q).unwrap(), "x"), 9);
    let q = edit_program(&p, &"repl@2.1.1.1=9".parse().unwrap()).unwrap();
    assert_eq!(env(&interpret(&q).unwrap(), "x"), 5);
    let q = edit_program(&p, &"repl@2.2=4".parse().unwrap()).unwrap();
    assert_eq!(env(&interpret(&q).unwrap(), "i"), 4);
    let q = edit_program(&p, &"swap@2.1.1.1".parse().unwrap()).unwrap();
    let mut labels = q.labels();
    let mut original = p.labels();
    labels.sort_by_key(|n| n.hash());
    original.sort_by_key(|n| n.hash());
    assert_eq!(labels, original);
    let q = edit_program(&p, &"ext@loop1=+2".parse().unwrap()).unwrap();
    assert_eq!(env(&interpret(&q).unwrap(), "i"), 5);

    for (spec, err) in [
        ("repl@3=1", EditError::BadPath("3".into())),
        ("repl@2.1.3.1=1", EditError::BadPath("2.1.3.1".into())),
        ("swap@2", EditError::NoSuccessor("2".into())),
        ("ext@loop2=+1", EditError::BadPath("loop2".into())),
        ("ext@2.1=+1", EditError::NotABound("2.1".into())),
    ] {
        assert_eq!(edit_program(&p, &spec.parse().unwrap()).unwrap_err(), err, "{spec}");
    }
}

#[test]
fn identity_edit_reruns_nothing() {
    let p = program("arraymax", 20).unwrap();
    let mut interp = Interp::new(Mode::Nominal).unwrap();
    interp.run(&p).unwrap();
    let same = edit_program(&p, &"repl@2=17".parse().unwrap()).unwrap();
    assert_eq!(same, p);
    let (_, stats) = interp.run(&same).unwrap();
    assert_eq!(stats.eval_runs, 0);
    assert_eq!(stats.engine.reexec, 0);
}

#[test]
fn unused_constant_repair_is_local() {
    let p = program("fact", 50).unwrap();
    let mut interp = Interp::new(Mode::Nominal).unwrap();
    let (before, _) = interp.run(&p).unwrap();
    let q = edit_program(&p, &standard_edit("fact", 50, EditKind::Repl).unwrap()).unwrap();
    let (after, stats) = interp.run(&q).unwrap();
    // The whole program and the edited assignment.
    assert_eq!(stats.eval_runs, 2);
    assert_eq!(after.env["u"], 11);
    assert_eq!(after.env["r"], before.env["r"]);
    assert!(interp.engine().violations().is_empty());
}

#[test]
fn labels_are_distinct_in_every_benchmark() {
    for name in PROGRAMS {
        let mut labels = program(name, 4).unwrap().labels();
        let n = labels.len();
        labels.sort_by_key(|l| l.hash());
        labels.dedup();
        assert_eq!(labels.len(), n, "{name}");
    }
}

#[test]
fn printed_benchmarks_parse_back() {
    for name in PROGRAMS {
        let p = program(name, 4).unwrap();
        assert_eq!(parse(&p.to_string()).unwrap(), p, "{name}");
    }
}

#[test]
fn benchmarks_compute_known_values() {
    with_big_stack(|| {
        let mut fact = 1i64;
        for i in 1..=30 {
            fact = fact * i % 1_000_003;
        }
        let check = |name: &str, n: u64, var: &str, want: i64| {
            let p = program(name, n).unwrap();
            let f = interpret(&p).unwrap();
            assert_eq!(f.env[var], want, "{name}");
            let (g, _) = Interp::new(Mode::Nominal).unwrap().run(&p).unwrap();
            assert_eq!(g, f);
        };
        check("fact", 30, "r", fact);
        check("intlog", 1000, "l", 9);
        check("intlog;fact", 30, "r", fact);
        // Independent generator for the array contents.
        let mut s = 17i64;
        let xs: Vec<i64> = (0..40)
            .map(|_| {
                s = (s * 75 + 74) % 65537;
                s
            })
            .collect();
        check("arraymax", 40, "m", *xs.iter().max().unwrap());
        let n = 3usize;
        let a: Vec<i64> = (0..n * n).map(|i| i as i64 + 1).collect();
        let b: Vec<i64> = (0..n * n).map(|i| i as i64 * 5 - i as i64 / 3).collect();
        let c: Vec<i64> = (0..n * n).map(|ij| (0..n).map(|k| a[ij / n * n + k] * b[k * n + ij % n]).sum()).collect();
        let f = interpret(&program("matmult", n as u64).unwrap()).unwrap();
        assert_eq!(f.array("c"), Some(c));
    });
}

#[test]
fn arrays_live_in_sequential_cells() {
    let f = interpret(&parse("a := array(2); b := array(3); b[2] := 7;").unwrap()).unwrap();
    assert_eq!((f.env["a"], f.env["b"]), (0, 3));
    assert_eq!(f.store.get(&3), Some(&3));
    assert_eq!(f.store.get(&6), Some(&7));
}
