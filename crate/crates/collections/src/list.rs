//! Named linked lists whose tails live in reference cells, plus memoized
//! map, filter and reverse (eager and lazy).
//!
//! An input list is handled through the reference cell holding its first
//! cell, so edits at any index, including the front, are a single `set`.
//! Transforms memoize one thunk per input cell, named by that cell's name, and
//! name their output cells and tail references by forking it.

use nominal_core::engine::Result;
use nominal_core::{fresh_name, ARef, AThunk, Engine, MemoFn, Name, Pointer};

use crate::CollectionError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum List {
    Nil,
    Cons(i64, Name, ARef<List>),
}

impl List {
    pub fn name(&self) -> Option<&Name> {
        match self {
            List::Nil => None,
            List::Cons(_, n, _) => Some(n),
        }
    }
}

/// A list whose tails are suspended computations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum LazyList {
    Nil,
    Cons(i64, Name, Option<AThunk<LazyList>>),
}

/// Build an input list from the outer layer with fresh names throughout.
pub fn list_of_values(eng: &mut Engine, values: &[i64]) -> Result<ARef<List>> {
    let mut next = eng.aref(fresh_name(), List::Nil)?;
    for &v in values.iter().rev() {
        let cell = List::Cons(v, fresh_name(), next);
        next = eng.aref(fresh_name(), cell)?;
    }
    Ok(next)
}

/// Values of a list, read without recording dependencies.
pub fn values_of(eng: &Engine, list: &List) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = list.clone();
    while let List::Cons(x, _, tl) = cur {
        out.push(x);
        cur = eng.peek(&tl)?;
    }
    Ok(out)
}

/// Values of the list held by `head`.
pub fn list_values(eng: &Engine, head: &ARef<List>) -> Result<Vec<i64>> {
    values_of(eng, &eng.peek(head)?)
}

/// Name and tail pointer of every cell, in order.
pub fn cell_identities(eng: &Engine, list: &List) -> Result<Vec<(Name, Pointer)>> {
    let mut out = Vec::new();
    let mut cur = list.clone();
    while let List::Cons(_, n, tl) = cur {
        out.push((n, tl.pointer().clone()));
        cur = eng.peek(&tl)?;
    }
    Ok(out)
}

/// The reference cell holding the list from index `i` on.
fn position(eng: &Engine, head: &ARef<List>, i: usize) -> std::result::Result<ARef<List>, CollectionError> {
    let mut r = head.clone();
    for k in 0..i {
        match eng.peek(&r)? {
            List::Cons(_, _, tl) => r = tl,
            List::Nil => return Err(CollectionError::IndexOutOfRange { index: i, len: k }),
        }
    }
    Ok(r)
}

pub fn list_len(eng: &Engine, head: &ARef<List>) -> Result<usize> {
    Ok(list_values(eng, head)?.len())
}

/// Insert `v` so it lands at index `i` (`i` may equal the length).
pub fn list_insert(eng: &mut Engine, head: &ARef<List>, i: usize, v: i64) -> std::result::Result<(), CollectionError> {
    let r = position(eng, head, i)?;
    let rest = eng.peek(&r)?;
    let tail = eng.aref(fresh_name(), rest)?;
    eng.set(&r, List::Cons(v, fresh_name(), tail))?;
    Ok(())
}

/// Unlink the element at index `i`.
pub fn list_delete(eng: &mut Engine, head: &ARef<List>, i: usize) -> std::result::Result<(), CollectionError> {
    let r = position(eng, head, i)?;
    match eng.peek(&r)? {
        List::Cons(_, _, tl) => {
            let rest = eng.peek(&tl)?;
            eng.set(&r, rest)?;
            Ok(())
        }
        List::Nil => Err(CollectionError::IndexOutOfRange { index: i, len: i }),
    }
}

/// Delete the element at `i`, then insert `v` in its place.
pub fn list_replace(eng: &mut Engine, head: &ARef<List>, i: usize, v: i64) -> std::result::Result<(), CollectionError> {
    list_delete(eng, head, i)?;
    list_insert(eng, head, i, v)
}

fn force_cell<R: nominal_core::Data>(eng: &mut Engine, m: &MemoFn<List, R>, cell: List, nil: R) -> Result<R> {
    match &cell {
        List::Nil => Ok(nil),
        List::Cons(_, nm, _) => {
            let t = eng.thunk(m, nm.clone(), cell.clone())?;
            eng.force(&t)
        }
    }
}

/// An eager transform: one start thunk over the input handle plus one
/// memoized step per input cell.
#[derive(Clone, Debug)]
pub struct ListTransform {
    start: MemoFn<(ARef<List>, Name), List>,
}

impl ListTransform {
    /// Thunk computing the transformed list, named `root`.
    pub fn apply(&self, eng: &mut Engine, root: Name, input: &ARef<List>) -> Result<AThunk<List>> {
        eng.thunk(&self.start, root.clone(), (input.clone(), root))
    }
}

fn transform(
    eng: &mut Engine,
    seed: &Name,
    body_id: &str,
    step: impl Fn(&mut Engine, &MemoFn<List, List>, List) -> Result<List> + 'static,
) -> Result<ListTransform> {
    let (s_start, s_step) = seed.fork();
    let step = eng.mk_mfn(s_step, &format!("{body_id}/step"), step)?;
    let start = eng.mk_mfn(s_start, &format!("{body_id}/start"), move |eng, _, (head, _): (ARef<List>, Name)| {
        let cell = eng.get(&head)?;
        force_cell(eng, &step, cell, List::Nil)
    })?;
    Ok(ListTransform { start })
}

/// Map `f` over a list. `label` identifies `f` in the memo table.
pub fn list_map(eng: &mut Engine, seed: &Name, label: &str, f: fn(i64) -> i64) -> Result<ListTransform> {
    transform(eng, seed, &format!("map:{label}"), move |eng, m, cell| {
        let List::Cons(x, nm, tl) = cell else { return Ok(List::Nil) };
        let next = eng.get(&tl)?;
        let rest = force_cell(eng, m, next, List::Nil)?;
        let (n1, n2) = nm.fork();
        Ok(List::Cons(f(x), n1, eng.aref(n2, rest)?))
    })
}

/// Keep the elements satisfying `keep`. A dropped cell forwards to the next
/// kept one, so output names come from kept input cells only.
pub fn list_filter(eng: &mut Engine, seed: &Name, label: &str, keep: fn(i64) -> bool) -> Result<ListTransform> {
    transform(eng, seed, &format!("filter:{label}"), move |eng, m, cell| {
        let List::Cons(x, nm, tl) = cell else { return Ok(List::Nil) };
        let next = eng.get(&tl)?;
        let rest = force_cell(eng, m, next, List::Nil)?;
        if !keep(x) {
            return Ok(rest);
        }
        let (n1, n2) = nm.fork();
        Ok(List::Cons(x, n1, eng.aref(n2, rest)?))
    })
}

/// Reverse by threading an accumulator; each accumulated cell is named from
/// the input cell it copies. The step that reaches the end stores the result
/// in a cell named from the root, so steps all return the same handle and an
/// edit near the end does not ripple back through the chain.
pub fn list_reverse(eng: &mut Engine, seed: &Name) -> Result<ListTransform> {
    let (s_start, s_step) = seed.fork();
    type Step = (List, List, Name);
    let step = eng.mk_mfn(s_step, "reverse/step", |eng, m, (cell, acc, out): Step| {
        let List::Cons(x, nm, tl) = cell else { return eng.aref(out, acc) };
        let (n1, n2) = nm.fork();
        let acc = List::Cons(x, n1, eng.aref(n2, acc)?);
        match eng.get(&tl)? {
            List::Nil => eng.aref(out, acc),
            next @ List::Cons(..) => {
                let t = eng.thunk(m, next.name().expect("cons").clone(), (next, acc, out))?;
                eng.force(&t)
            }
        }
    })?;
    let start = eng.mk_mfn(s_start, "reverse/start", move |eng, _, (head, root): (ARef<List>, Name)| match eng.get(&head)? {
        List::Nil => Ok(List::Nil),
        cell @ List::Cons(..) => {
            let t = eng.thunk(&step, cell.name().expect("cons").clone(), (cell, List::Nil, root.second()))?;
            let out = eng.force(&t)?;
            eng.get(&out)
        }
    })?;
    Ok(ListTransform { start })
}

/// A lazy transform; tails are unforced thunks.
#[derive(Clone, Debug)]
pub struct LazyTransform {
    start: MemoFn<ARef<List>, LazyList>,
}

impl LazyTransform {
    pub fn apply(&self, eng: &mut Engine, root: Name, input: &ARef<List>) -> Result<AThunk<LazyList>> {
        eng.thunk(&self.start, root, input.clone())
    }
}

fn lazy_tail(eng: &mut Engine, m: &MemoFn<List, LazyList>, next: List) -> Result<Option<AThunk<LazyList>>> {
    match &next {
        List::Nil => Ok(None),
        List::Cons(_, nm, _) => Ok(Some(eng.thunk(m, nm.clone(), next.clone())?)),
    }
}

fn lazy_transform(
    eng: &mut Engine,
    seed: &Name,
    body_id: &str,
    step: impl Fn(&mut Engine, &MemoFn<List, LazyList>, List) -> Result<LazyList> + 'static,
) -> Result<LazyTransform> {
    let (s_start, s_step) = seed.fork();
    let step = eng.mk_mfn(s_step, &format!("{body_id}/step"), step)?;
    let start = eng.mk_mfn(s_start, &format!("{body_id}/start"), move |eng, _, head: ARef<List>| {
        let cell = eng.get(&head)?;
        force_cell(eng, &step, cell, LazyList::Nil)
    })?;
    Ok(LazyTransform { start })
}

pub fn lazy_map(eng: &mut Engine, seed: &Name, label: &str, f: fn(i64) -> i64) -> Result<LazyTransform> {
    lazy_transform(eng, seed, &format!("lazy-map:{label}"), move |eng, m, cell| {
        let List::Cons(x, nm, tl) = cell else { return Ok(LazyList::Nil) };
        let next = eng.get(&tl)?;
        let tail = lazy_tail(eng, m, next)?;
        Ok(LazyList::Cons(f(x), nm.first(), tail))
    })
}

pub fn lazy_filter(eng: &mut Engine, seed: &Name, label: &str, keep: fn(i64) -> bool) -> Result<LazyTransform> {
    lazy_transform(eng, seed, &format!("lazy-filter:{label}"), move |eng, m, cell| {
        let List::Cons(x, nm, tl) = cell else { return Ok(LazyList::Nil) };
        let next = eng.get(&tl)?;
        if keep(x) {
            let tail = lazy_tail(eng, m, next)?;
            Ok(LazyList::Cons(x, nm.first(), tail))
        } else {
            force_cell(eng, m, next, LazyList::Nil)
        }
    })
}

/// Force a lazy list from the outer layer all the way to its end.
pub fn lazy_values(eng: &mut Engine, root: &AThunk<LazyList>) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = eng.force(root)?;
    while let LazyList::Cons(x, _, tail) = cur {
        out.push(x);
        cur = match tail {
            Some(t) => eng.force(&t)?,
            None => LazyList::Nil,
        };
    }
    Ok(out)
}

/// The last element, forcing every tail on the way.
pub fn lazy_last(eng: &mut Engine, root: &AThunk<LazyList>) -> Result<Option<i64>> {
    Ok(lazy_values(eng, root)?.last().copied())
}

/// Parse newline-separated integers, ignoring blank lines.
pub fn parse_values(text: &str) -> std::result::Result<Vec<i64>, std::num::ParseIntError> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::parse).collect()
}

/// One integer per line.
pub fn format_values(values: &[i64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}
