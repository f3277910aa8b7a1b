use std::collections::{BTreeMap, HashSet};

use nominal_collections::trie::*;
use nominal_collections::Trie;
use nominal_core::{fresh_name, Engine, EngineError, Mode, Name, Pointer};
use nominal_core::dcg::DcgError;
use proptest::prelude::*;

type T = Trie<i64, i64>;

#[test]
fn find_on_trivial_tries() {
    let mut eng = Engine::default();
    let leaf: T = Trie::Leaf(vec![(1, 10)]);
    assert_eq!(trie_find_bits(&mut eng, &leaf, &[]).unwrap(), Some(vec![(1, 10)]));
    assert_eq!(trie_find_bits(&mut eng, &T::Nil, &[]).unwrap(), None);
    assert_eq!(trie_find_bits(&mut eng, &T::Nil, &[true]).unwrap(), None);
}

#[test]
fn extend_then_find() {
    let mut eng = Engine::default();
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", DEFAULT_TRIE_DEPTH).unwrap();
    let mut t = T::Nil;
    for k in 0..20 {
        t = ops.extend(&mut eng, fresh_name(), &t, k, k * k).unwrap();
    }
    for k in 0..20 {
        assert_eq!(ops.find(&mut eng, &t, &k).unwrap(), Some(k * k));
        assert_eq!(ops.peek(&eng, &t, &k).unwrap(), Some(k * k));
        let bits = key_bits(&k, ops.depth());
        let bucket = trie_find_bits(&mut eng, &t, &bits).unwrap().unwrap();
        assert!(bucket.contains(&(k, k * k)));
    }
    assert_eq!(ops.find(&mut eng, &t, &99).unwrap(), None);
    assert_eq!(ops.entries(&eng, &t).unwrap().len(), 20);
}

#[test]
fn path_copy_shares_untouched_branches() {
    let mut eng = Engine::default();
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", 16).unwrap();
    let t1 = ops.extend(&mut eng, fresh_name(), &T::Nil, 1, 1).unwrap();
    let t2 = ops.extend(&mut eng, fresh_name(), &t1, 2, 2).unwrap();
    let (Trie::Bin(_, l1, r1), Trie::Bin(_, l2, r2)) = (&t1, &t2) else { panic!("expected nodes") };
    let (b1, b2) = (key_bits(&1i64, 16), key_bits(&2i64, 16));
    if b1[0] != b2[0] {
        // The branch holding key 1 is carried over untouched.
        if b1[0] {
            assert_eq!(l1, l2);
        } else {
            assert_eq!(r1, r2);
        }
    }
    assert_eq!(ops.peek(&eng, &t2, &1).unwrap(), Some(1));
    assert_eq!(ops.peek(&eng, &t1, &2).unwrap(), None);
}

#[test]
fn colliding_paths_share_a_bucket() {
    let mut eng = Engine::default();
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", 1).unwrap();
    let mut t = T::Nil;
    for k in 0..8 {
        t = ops.extend(&mut eng, fresh_name(), &t, k, -k).unwrap();
    }
    for k in 0..8 {
        assert_eq!(ops.peek(&eng, &t, &k).unwrap(), Some(-k));
    }
}

#[test]
fn reusing_an_extension_name_is_ambiguous() {
    let mut eng = Engine::default();
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", 8).unwrap();
    let m = eng
        .mk_mfn(Name::root().first(), "twice", move |eng, _, nm: Name| {
            let t = ops.extend(eng, nm.clone(), &T::Nil, 1, 1)?;
            ops.extend(eng, nm, &t, 2, 2)
        })
        .unwrap();
    let th = eng.thunk(&m, Name::root(), fresh_name()).unwrap();
    let err = eng.force(&th).unwrap_err();
    assert!(matches!(err, EngineError::Graph(DcgError::AmbiguousName { .. })), "{err}");
}

fn path_sets(eng: &mut Engine, ops: &TrieOps<i64, i64>, names: &[Name], keys: &[i64]) -> Vec<HashSet<Pointer>> {
    let mut t = T::Nil;
    let mut out = Vec::new();
    for (nm, &k) in names.iter().zip(keys) {
        t = ops.extend(eng, nm.clone(), &t, k, k).unwrap();
        out.push(ops.path_pointers(eng, &t, &k).unwrap().into_iter().collect());
    }
    out
}

#[test]
fn extension_paths_depend_only_on_names() {
    let keys = [11i64, 22, 33, 44, 55, 66];
    let names: Vec<Name> = (0..6).map(|_| fresh_name()).collect();
    let mut eng = Engine::default();
    let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", DEFAULT_TRIE_DEPTH).unwrap();
    let full = path_sets(&mut eng, &ops, &names, &keys);
    let tail = path_sets(&mut eng, &ops, &names[1..], &keys[1..]);
    assert_eq!(&full[1..], &tail[..]);
    assert!(eng.violations().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trie_matches_map(
        ops_list in prop::collection::vec((0i64..40, any::<i64>()), 0..40),
        depth in 1u32..=64,
        mode in prop::sample::select(Mode::ALL.to_vec()),
    ) {
        let mut eng = Engine::new(mode);
        let ops = trie_ops::<i64, i64>(&mut eng, &Name::root(), "int", depth).unwrap();
        let mut t = T::Nil;
        let mut oracle = BTreeMap::new();
        for (k, v) in ops_list {
            t = ops.extend(&mut eng, fresh_name(), &t, k, v).unwrap();
            oracle.insert(k, v);
        }
        for k in 0..40 {
            prop_assert_eq!(ops.peek(&eng, &t, &k).unwrap(), oracle.get(&k).copied());
        }
        let mut got = ops.entries(&eng, &t).unwrap();
        got.sort();
        prop_assert_eq!(got, oracle.into_iter().collect::<Vec<_>>());
    }
}
