//! Probabilistically balanced trees built from named lists, folds over them,
//! and a mergesort driven by the same tree.
//!
//! Every element gets a height from the trailing zero bits of its content
//! hash. The tree keeps list order in-order and makes an element an ancestor
//! of its neighbours exactly when its height dominates everything between
//! them; among equal heights the later element is the ancestor. The shape is
//! therefore a function of the value sequence alone.

use nominal_core::engine::{content_hash, Result};
use nominal_core::{ARef, AThunk, Engine, MemoFn, Name};

use crate::list::{values_of, List};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Tree {
    Leaf,
    Bin(Name, i64, ARef<Tree>, ARef<Tree>),
}

/// Trailing zero bits of a hash, at most 63.
pub fn height_of_hash(h: u64) -> u32 {
    h.trailing_zeros().min(63)
}

pub fn height_of(x: i64) -> u32 {
    height_of_hash(content_hash(&x))
}

/// Loop state of one tree-building level: stop before any element of height
/// `bound` or more, with `left` built so far, continuing at `cell`.
type GrowArg = (u32, Tree, List);

/// Builds trees from input lists.
#[derive(Clone, Debug)]
pub struct TreeBuilder {
    start: MemoFn<ARef<List>, Tree>,
}

fn height_below(cell: &List, bound: u32) -> bool {
    matches!(cell, List::Cons(x, ..) if height_of(*x) < bound)
}

fn grow_name(cell: &List) -> Name {
    cell.name().expect("cons").fork4().3
}

fn grow(eng: &mut Engine, m: &MemoFn<GrowArg, (Tree, List)>, bound: u32, left: Tree, cell: List) -> Result<(Tree, List)> {
    if !height_below(&cell, bound) {
        return Ok((left, cell));
    }
    let t = eng.thunk(m, grow_name(&cell), (bound, left, cell))?;
    eng.force(&t)
}

pub fn tree_builder(eng: &mut Engine, seed: &Name) -> Result<TreeBuilder> {
    let (s_start, s_grow) = seed.fork();
    let grow_fn = eng.mk_mfn(s_grow, "tree/grow", |eng, m, (bound, left, cell): GrowArg| {
        let List::Cons(x, nm, tl) = cell else { return Ok((left, List::Nil)) };
        let h = height_of(x);
        let (n_bin, n_left, n_right, _) = nm.fork4();
        let next = eng.get(&tl)?;
        let (right, rest) = grow(eng, m, h, Tree::Leaf, next)?;
        let node = Tree::Bin(n_bin, x, eng.aref(n_left, left)?, eng.aref(n_right, right)?);
        grow(eng, m, bound, node, rest)
    })?;
    let start = eng.mk_mfn(s_start, "tree/start", move |eng, _, head: ARef<List>| {
        let cell = eng.get(&head)?;
        Ok(grow(eng, &grow_fn, u32::MAX, Tree::Leaf, cell)?.0)
    })?;
    Ok(TreeBuilder { start })
}

impl TreeBuilder {
    pub fn apply(&self, eng: &mut Engine, root: Name, input: &ARef<List>) -> Result<AThunk<Tree>> {
        eng.thunk(&self.start, root, input.clone())
    }
}

/// A memoized fold over trees, one thunk per node named by the node's name.
#[derive(Clone, Debug)]
pub struct TreeFold {
    m: MemoFn<Tree, i64>,
    identity: i64,
}

impl TreeFold {
    /// Fold a tree; usable from inside thunks and from the outer layer.
    pub fn fold(&self, eng: &mut Engine, t: &Tree) -> Result<i64> {
        match t {
            Tree::Leaf => Ok(self.identity),
            Tree::Bin(nm, ..) => {
                let th = eng.thunk(&self.m, nm.clone(), t.clone())?;
                eng.force(&th)
            }
        }
    }
}

/// Fold with an associative `op` and its `identity`; `label` names `op`.
pub fn tree_fold(eng: &mut Engine, seed: &Name, label: &str, identity: i64, op: fn(i64, i64) -> i64) -> Result<TreeFold> {
    let m = eng.mk_mfn(seed.clone(), &format!("fold:{label}"), move |eng, m, t: Tree| {
        let Tree::Bin(_, x, l, r) = t else { return Ok(identity) };
        let this = TreeFold { m: m.clone(), identity };
        let lt = eng.get(&l)?;
        let rt = eng.get(&r)?;
        let a = this.fold(eng, &lt)?;
        let b = this.fold(eng, &rt)?;
        Ok(op(op(a, x), b))
    })?;
    Ok(TreeFold { m, identity })
}

/// Minimum, with `i64::MAX` for the empty tree.
pub fn tree_min(eng: &mut Engine, seed: &Name) -> Result<TreeFold> {
    tree_fold(eng, seed, "min", i64::MAX, i64::min)
}

/// Wrapping sum, with 0 for the empty tree.
pub fn tree_sum(eng: &mut Engine, seed: &Name) -> Result<TreeFold> {
    tree_fold(eng, seed, "sum", 0, i64::wrapping_add)
}

/// Depth of the tree (a leaf has depth 0), read without dependencies.
pub fn tree_depth(eng: &Engine, t: &Tree) -> Result<usize> {
    match t {
        Tree::Leaf => Ok(0),
        Tree::Bin(_, _, l, r) => {
            let a = tree_depth(eng, &eng.peek(l)?)?;
            let b = tree_depth(eng, &eng.peek(r)?)?;
            Ok(1 + a.max(b))
        }
    }
}

/// In-order values, read without dependencies.
pub fn tree_values(eng: &Engine, t: &Tree) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let mut cur = t.clone();
    loop {
        match cur {
            Tree::Bin(_, x, l, r) => {
                stack.push((x, r));
                cur = eng.peek(&l)?;
            }
            Tree::Leaf => match stack.pop() {
                Some((x, r)) => {
                    out.push(x);
                    cur = eng.peek(&r)?;
                }
                None => return Ok(out),
            },
        }
    }
}

/// Mergesort over the tree of an input list.
#[derive(Clone, Debug)]
pub struct Sorter {
    sort: MemoFn<Tree, List>,
}

type MergeArg = (List, List);

/// Merge two sorted lists. Each step is a thunk named from the cell it takes,
/// which also names the output cell and its tail reference.
fn merge(eng: &mut Engine, m: &MemoFn<MergeArg, List>, a: List, b: List) -> Result<List> {
    let taken = match (&a, &b) {
        (List::Nil, _) => return Ok(b),
        (_, List::Nil) => return Ok(a),
        (List::Cons(x, nx, _), List::Cons(y, ny, _)) => {
            if x <= y {
                nx
            } else {
                ny
            }
        }
    };
    let t = eng.thunk(m, taken.fork4().2, (a.clone(), b.clone()))?;
    eng.force(&t)
}

pub fn sorter(eng: &mut Engine, seed: &Name) -> Result<Sorter> {
    let (s_sort, s_merge) = seed.fork();
    let merge_fn = eng.mk_mfn(s_merge, "sort/merge", |eng, m, (a, b): MergeArg| {
        let (List::Cons(x, nx, tx), List::Cons(y, _, _)) = (&a, &b) else {
            unreachable!("merge steps start on two non-empty lists")
        };
        let take_left = x <= y;
        let (v, nv, tv, other) = if take_left {
            (*x, nx.clone(), tx.clone(), b.clone())
        } else {
            let List::Cons(y, ny, ty) = b else { unreachable!() };
            (y, ny, ty, a)
        };
        let rest = eng.get(&tv)?;
        let merged = if take_left { merge(eng, m, rest, other)? } else { merge(eng, m, other, rest)? };
        let (n_out, n_ref, _, _) = nv.fork4();
        Ok(List::Cons(v, n_out, eng.aref(n_ref, merged)?))
    })?;
    let sort = eng.mk_mfn(s_sort, "sort/node", move |eng, m, t: Tree| {
        let Tree::Bin(nm, x, l, r) = t else { return Ok(List::Nil) };
        let this = Sorter { sort: m.clone() };
        let lt = eng.get(&l)?;
        let rt = eng.get(&r)?;
        let sl = this.sort_tree(eng, &lt)?;
        let sr = this.sort_tree(eng, &rt)?;
        let (n_cell, n_ref) = nm.fork();
        let single = List::Cons(x, n_cell, eng.aref(n_ref, List::Nil)?);
        let right = merge(eng, &merge_fn, single, sr)?;
        merge(eng, &merge_fn, sl, right)
    })?;
    Ok(Sorter { sort })
}

impl Sorter {
    pub fn sort_tree(&self, eng: &mut Engine, t: &Tree) -> Result<List> {
        match t {
            Tree::Leaf => Ok(List::Nil),
            Tree::Bin(nm, ..) => {
                let th = eng.thunk(&self.sort, nm.clone(), t.clone())?;
                eng.force(&th)
            }
        }
    }
}

/// Middle element of a sorted list (the upper middle for even lengths),
/// reading every cell with recorded dependencies.
pub fn median_of_sorted(eng: &mut Engine, sorted: &List) -> Result<Option<i64>> {
    let mut xs = Vec::new();
    let mut cur = sorted.clone();
    while let List::Cons(x, _, tl) = cur {
        xs.push(x);
        cur = eng.get(&tl)?;
    }
    Ok(xs.get(xs.len() / 2).copied())
}

/// Values of a sorted output list.
pub fn sorted_values(eng: &Engine, sorted: &List) -> Result<Vec<i64>> {
    values_of(eng, sorted)
}
