use nominal_collections::list::{list_of_values, list_replace, list_values, values_of};
use nominal_collections::tree::*;
use nominal_collections::Tree;
use nominal_core::{with_big_stack, ARef, Engine, Mode, Name};
use proptest::prelude::*;

/// Smallest non-negative values with the requested heights, all distinct.
fn values_with_heights(hs: &[u32]) -> Vec<i64> {
    let mut used = std::collections::HashSet::new();
    hs.iter()
        .map(|&h| {
            let v = (0..).find(|v| height_of(*v) == h && !used.contains(v)).unwrap();
            used.insert(v);
            v
        })
        .collect()
}

/// Reference shape: the last element of maximal height is the root; recurse on both sides.
fn oracle_shape(xs: &[i64]) -> String {
    if xs.is_empty() {
        return ".".into();
    }
    let hmax = xs.iter().map(|&x| height_of(x)).max().unwrap();
    let i = xs.iter().rposition(|&x| height_of(x) == hmax).unwrap();
    format!("({} {} {})", oracle_shape(&xs[..i]), xs[i], oracle_shape(&xs[i + 1..]))
}

fn shape(eng: &Engine, t: &Tree) -> String {
    match t {
        Tree::Leaf => ".".into(),
        Tree::Bin(_, x, l, r) => format!(
            "({} {} {})",
            shape(eng, &eng.peek(l).unwrap()),
            x,
            shape(eng, &eng.peek(r).unwrap())
        ),
    }
}

fn build(eng: &mut Engine, xs: &[i64]) -> (ARef<nominal_collections::List>, nominal_core::AThunk<Tree>) {
    let head = list_of_values(eng, xs).unwrap();
    let b = tree_builder(eng, &Name::root().first()).unwrap();
    let t = b.apply(eng, Name::root(), &head).unwrap();
    (head, t)
}

#[test]
fn heights_follow_trailing_zeros() {
    assert_eq!(height_of_hash(0b1), 0);
    assert_eq!(height_of_hash(0b100), 2);
    assert_eq!(height_of_hash(0), 63);
    let mean = (0..10_000i64).map(|x| height_of(x.wrapping_mul(0x9e37_79b9)) as f64).sum::<f64>() / 10_000.0;
    assert!((0.9..=1.1).contains(&mean), "mean height {mean}");
}

#[test]
fn canonical_example_shape() {
    let xs = values_with_heights(&[0, 1, 0, 2, 1, 0]);
    let (a, b, c, d, e, f) = (xs[0], xs[1], xs[2], xs[3], xs[4], xs[5]);
    let mut eng = Engine::default();
    let (_, t) = build(&mut eng, &xs);
    let tree = eng.force(&t).unwrap();
    let expect = format!("((({a}) {b} (. {c} .)) {d} (. {e} (. {f} .)))").replace(&format!("({a})"), &format!("(. {a} .)"));
    assert_eq!(shape(&eng, &tree), expect);
}

#[test]
fn singleton_and_empty() {
    let mut eng = Engine::default();
    let (_, t) = build(&mut eng, &[7]);
    let tree = eng.force(&t).unwrap();
    assert_eq!(shape(&eng, &tree), "(. 7 .)");
    let (_, t) = {
        let head = list_of_values(&mut eng, &[]).unwrap();
        let b = tree_builder(&mut eng, &Name::root().second()).unwrap();
        (head.clone(), b.apply(&mut eng, Name::root(), &head).unwrap())
    };
    assert_eq!(eng.force(&t).unwrap(), Tree::Leaf);
    let min = tree_min(&mut eng, &Name::root()).unwrap();
    assert_eq!(min.fold(&mut eng, &Tree::Leaf).unwrap(), i64::MAX);
}

#[test]
fn min_follows_replacements() {
    let mut eng = Engine::default();
    let (head, t) = build(&mut eng, &[3, 2, 1, 4, 5, 6]);
    let min = tree_min(&mut eng, &Name::root().second()).unwrap();
    let tree = eng.force(&t).unwrap();
    assert_eq!(min.fold(&mut eng, &tree).unwrap(), 1);
    list_replace(&mut eng, &head, 2, 9).unwrap();
    let tree = eng.force(&t).unwrap();
    assert_eq!(min.fold(&mut eng, &tree).unwrap(), 2);
    assert!(eng.violations().is_empty());
}

fn min_root(eng: &mut Engine, xs: &[i64]) -> (ARef<nominal_collections::List>, nominal_core::AThunk<i64>) {
    let head = list_of_values(eng, xs).unwrap();
    let (s1, s2) = Name::root().fork();
    let b = tree_builder(eng, &s1).unwrap();
    let min = tree_min(eng, &s2).unwrap();
    let top = eng
        .mk_mfn(Name::root(), "min-of-list", move |eng, _, head: ARef<nominal_collections::List>| {
            let t = b.apply(eng, Name::root(), &head)?;
            let tree = eng.force(&t)?;
            min.fold(eng, &tree)
        })
        .unwrap();
    let root = eng.thunk(&top, Name::root(), head.clone()).unwrap();
    (head, root)
}

#[test]
fn replace_repair_is_bounded_by_depth() {
    let n = 1024;
    let xs: Vec<i64> = (0..n as i64).map(|i| i.wrapping_mul(7919) % 100_003).collect();
    let mut eng = Engine::new(Mode::Nominal);
    let (head, root) = min_root(&mut eng, &xs);
    assert_eq!(eng.force(&root).unwrap(), *xs.iter().min().unwrap());
    let mut oracle = xs.clone();
    for (k, pos) in (0..10).map(|k| (k, (2 * k + 1) * n / 20)) {
        let depth = {
            let b = tree_builder(&mut eng, &Name::root().fork().0).unwrap();
            let t = b.apply(&mut eng, Name::root(), &head).unwrap();
            let tree = eng.force(&t).unwrap();
            tree_depth(&eng, &tree).unwrap() as u64
        };
        let c0 = eng.counters();
        let v = 200_000 + k as i64;
        list_replace(&mut eng, &head, pos, v).unwrap();
        oracle[pos] = v;
        assert_eq!(eng.force(&root).unwrap(), *oracle.iter().min().unwrap());
        let used = (eng.counters() - c0).reexec;
        // Two paths of folds to the root plus the rebuilt spine around the edit.
        assert!(used <= 2 * depth + 8, "position {pos}: {used} re-executions, depth {depth}");
    }
    assert!(eng.violations().is_empty());
}

#[test]
fn mergesort_sorts() {
    with_big_stack(|| {
        let mut eng = Engine::default();
        let xs: Vec<i64> = (0..256).map(|i: i64| (i * 7919 + 13) % 1009 - 500).collect();
        let head = list_of_values(&mut eng, &xs).unwrap();
        let (s1, s2) = Name::root().fork();
        let b = tree_builder(&mut eng, &s1).unwrap();
        let sorter = sorter(&mut eng, &s2).unwrap();
        let t = b.apply(&mut eng, Name::root(), &head).unwrap();
        let tree = eng.force(&t).unwrap();
        let sorted = sorter.sort_tree(&mut eng, &tree).unwrap();
        let mut expect = xs.clone();
        expect.sort();
        assert_eq!(values_of(&eng, &sorted).unwrap(), expect);

        let already: Vec<i64> = (0..50).collect();
        let head = list_of_values(&mut eng, &already).unwrap();
        let b = tree_builder(&mut eng, &Name::root().first().first()).unwrap();
        let t = b.apply(&mut eng, Name::root(), &head).unwrap();
        let tree = eng.force(&t).unwrap();
        let sorted = sorter.sort_tree(&mut eng, &tree).unwrap();
        assert_eq!(values_of(&eng, &sorted).unwrap(), already);
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tree_shape_is_canonical(xs in prop::collection::vec(-1000i64..1000, 0..60)) {
        let mut eng = Engine::default();
        let (_, t) = build(&mut eng, &xs);
        let tree = eng.force(&t).unwrap();
        prop_assert_eq!(shape(&eng, &tree), oracle_shape(&xs));
        prop_assert_eq!(tree_values(&eng, &tree).unwrap(), xs);
    }

    #[test]
    fn folds_and_sort_track_edits(
        xs in prop::collection::vec(-1000i64..1000, 1..60),
        edits in prop::collection::vec((any::<usize>(), -1000i64..1000), 1..6),
        mode in prop::sample::select(Mode::ALL.to_vec()),
    ) {
        with_big_stack(move || -> Result<(), TestCaseError> {
            let mut eng = Engine::new(mode);
            let head = list_of_values(&mut eng, &xs).unwrap();
            let (s1, s2, s3, s4) = Name::root().fork4();
            let b = tree_builder(&mut eng, &s1).unwrap();
            let min = tree_min(&mut eng, &s2).unwrap();
            let sum = tree_sum(&mut eng, &s3).unwrap();
            let srt = sorter(&mut eng, &s4).unwrap();
            let t = b.apply(&mut eng, Name::root(), &head).unwrap();
            let mut oracle = xs.clone();
            for (i, v) in edits {
                let i = i % oracle.len();
                list_replace(&mut eng, &head, i, v).unwrap();
                oracle[i] = v;
                let tree = eng.force(&t).unwrap();
                prop_assert_eq!(shape(&eng, &tree), oracle_shape(&oracle));
                prop_assert_eq!(min.fold(&mut eng, &tree).unwrap(), *oracle.iter().min().unwrap());
                prop_assert_eq!(sum.fold(&mut eng, &tree).unwrap(), oracle.iter().sum::<i64>());
                let sorted = srt.sort_tree(&mut eng, &tree).unwrap();
                let mut expect = oracle.clone();
                expect.sort();
                prop_assert_eq!(values_of(&eng, &sorted).unwrap(), expect.clone());
                prop_assert_eq!(median_of_sorted(&mut eng, &sorted).unwrap(), expect.get(expect.len() / 2).copied());
            }
            prop_assert_eq!(list_values(&eng, &head).unwrap(), oracle);
            prop_assert!(eng.violations().is_empty(), "{:?}", eng.violations());
            Ok(())
        })?;
    }
}
