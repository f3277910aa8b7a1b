//! First-class names, namespaces and pointers.
//!
//! A [`Name`] is a path of binary fork steps hanging below a base. There are
//! three bases: the root `•` that user code forks from, fresh symbols handed
//! out by [`fresh_name`], and content symbols produced by [`name_of_content`].
//! Because the bases differ, the three families never overlap.
//!
//! Every level caches a 64-bit hash, so [`name_eq`] almost always settles on a
//! single integer comparison and only walks the tails on a hash match.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::Arc;

/// Seed of the name hash. Every name identity is derived from it.
pub const NAME_HASH_SEED: u64 = 0x6e6f_6d69_6e61_6c21;

const FRESH_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const CONTENT_SALT: u64 = 0xc2b2_ae3d_27d4_eb4f;
const FORK1_SALT: u64 = 0x1656_67b1_9e37_79f9;
const FORK2_SALT: u64 = 0x27d4_eb2f_1656_67c5;
const TOP_HASH: u64 = 0x7f4a_7c15_9e37_79b9;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which child of a fork.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    First,
    Second,
}

/// A binary-path identifier with a cached hash at every level.
#[derive(Clone)]
pub struct Name(Arc<NameNode>);

struct NameNode {
    hash: u64,
    kind: NameKind,
}

enum NameKind {
    Root,
    Fresh { thread: u32, index: u64 },
    Content(u64),
    Fork(Side, Name),
}

/// Borrowed view of a name's outermost step.
#[derive(Debug)]
pub enum NameView<'a> {
    Root,
    Fresh { thread: u32, index: u64 },
    Content(u64),
    Fork1 { tail_hash: u64, tail: &'a Name },
    Fork2 { tail_hash: u64, tail: &'a Name },
}

impl Name {
    /// The base name `•`.
    pub fn root() -> Name {
        thread_local! {
            static ROOT: Name = Name(Arc::new(NameNode { hash: mix(NAME_HASH_SEED), kind: NameKind::Root }));
        }
        ROOT.with(Name::clone)
    }

    fn step(&self, side: Side) -> Name {
        let salt = match side {
            Side::First => FORK1_SALT,
            Side::Second => FORK2_SALT,
        };
        Name(Arc::new(NameNode {
            hash: mix(self.hash() ^ salt),
            kind: NameKind::Fork(side, self.clone()),
        }))
    }

    /// `(self·1, self·2)`.
    pub fn fork(&self) -> (Name, Name) {
        (self.step(Side::First), self.step(Side::Second))
    }

    /// `self·1`.
    pub fn first(&self) -> Name {
        self.step(Side::First)
    }

    /// `self·2`.
    pub fn second(&self) -> Name {
        self.step(Side::Second)
    }

    /// Leaves of two nested forks: `(·1·1, ·1·2, ·2·1, ·2·2)`.
    pub fn fork4(&self) -> (Name, Name, Name, Name) {
        let (a, b) = self.fork();
        let (a1, a2) = a.fork();
        let (b1, b2) = b.fork();
        (a1, a2, b1, b2)
    }

    /// Descend along a sequence of fork steps.
    pub fn path<I: IntoIterator<Item = Side>>(&self, steps: I) -> Name {
        steps.into_iter().fold(self.clone(), |n, s| n.step(s))
    }

    /// The cached 64-bit hash of this name.
    #[inline]
    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    pub fn view(&self) -> NameView<'_> {
        match &self.0.kind {
            NameKind::Root => NameView::Root,
            NameKind::Fresh { thread, index } => NameView::Fresh { thread: *thread, index: *index },
            NameKind::Content(h) => NameView::Content(*h),
            NameKind::Fork(Side::First, t) => NameView::Fork1 { tail_hash: t.hash(), tail: t },
            NameKind::Fork(Side::Second, t) => NameView::Fork2 { tail_hash: t.hash(), tail: t },
        }
    }

    /// Number of fork steps above the base.
    pub fn depth(&self) -> usize {
        let mut n = self;
        let mut d = 0;
        while let NameKind::Fork(_, t) = &n.0.kind {
            d += 1;
            n = t;
        }
        d
    }

    /// True when `self` is `ancestor` or lies below it.
    pub fn descends_from(&self, ancestor: &Name) -> bool {
        let mut n = self;
        loop {
            if n == ancestor {
                return true;
            }
            match &n.0.kind {
                NameKind::Fork(_, t) => n = t,
                _ => return false,
            }
        }
    }

    fn split(&self) -> (&NameNode, Vec<Side>) {
        let mut steps = Vec::new();
        let mut n = self;
        while let NameKind::Fork(side, t) = &n.0.kind {
            steps.push(*side);
            n = t;
        }
        steps.reverse();
        (&n.0, steps)
    }
}

/// Two names are equal iff their paths agree; hashes are compared first.
pub fn name_eq(a: &Name, b: &Name) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        if a.hash() != b.hash() {
            return false;
        }
        if Arc::ptr_eq(&a.0, &b.0) {
            return true;
        }
        match (&a.0.kind, &b.0.kind) {
            (NameKind::Root, NameKind::Root) => return true,
            (NameKind::Fresh { thread: t1, index: i1 }, NameKind::Fresh { thread: t2, index: i2 }) => {
                return t1 == t2 && i1 == i2
            }
            (NameKind::Content(x), NameKind::Content(y)) => return x == y,
            (NameKind::Fork(s1, t1), NameKind::Fork(s2, t2)) if s1 == s2 => {
                a = t1;
                b = t2;
            }
            _ => return false,
        }
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        name_eq(self, other)
    }
}
impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash)
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        if name_eq(self, other) {
            return Ordering::Equal;
        }
        let (base_a, steps_a) = self.split();
        let (base_b, steps_b) = other.split();
        let rank = |k: &NameKind| -> (u8, u64, u64) {
            match k {
                NameKind::Root => (0, 0, 0),
                NameKind::Fresh { thread, index } => (1, *thread as u64, *index),
                NameKind::Content(h) => (2, *h, 0),
                NameKind::Fork(..) => unreachable!("split returns a base"),
            }
        };
        rank(&base_a.kind).cmp(&rank(&base_b.kind)).then_with(|| steps_a.cmp(&steps_b))
    }
}
impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (base, steps) = self.split();
        match &base.kind {
            NameKind::Root => write!(f, "•")?,
            NameKind::Fresh { thread, index } => write!(f, "new{thread}:{index}")?,
            NameKind::Content(h) => write!(f, "hash:{h:016x}")?,
            NameKind::Fork(..) => unreachable!(),
        }
        for s in steps {
            f.write_str(match s {
                Side::First => ".1",
                Side::Second => ".2",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(n·1, n·2)`.
pub fn fork(n: &Name) -> (Name, Name) {
    n.fork()
}

/// `fork(fork(n).0) ++ fork(fork(n).1)`.
pub fn fork4(n: &Name) -> (Name, Name, Name, Name) {
    n.fork4()
}

static NEXT_THREAD_TAG: AtomicU32 = AtomicU32::new(1);

thread_local! {
    static THREAD_TAG: u32 = NEXT_THREAD_TAG.fetch_add(1, AtomicOrdering::Relaxed);
    static FRESH_COUNTER: Cell<u64> = const { Cell::new(0) };
}

/// A name never returned before on this thread and never produced by forking
/// the root or by [`name_of_content`].
///
/// Each thread owns a counter and a process-unique tag, so names are distinct
/// across threads as well.
pub fn fresh_name() -> Name {
    let thread = THREAD_TAG.with(|t| *t);
    let index = FRESH_COUNTER.with(|c| {
        let i = c.get();
        c.set(i + 1);
        i
    });
    let hash = mix(mix(FRESH_SALT ^ NAME_HASH_SEED ^ ((thread as u64) << 40)) ^ index);
    Name(Arc::new(NameNode { hash, kind: NameKind::Fresh { thread, index } }))
}

/// Restart this thread's fresh-name counter. For reproducible test runs only:
/// names handed out before the reset will be handed out again.
pub fn reset_fresh_names() {
    FRESH_COUNTER.with(|c| c.set(0));
}

/// Deterministic name for a content hash; equal hashes give equal names.
pub fn name_of_content(content_hash: u64) -> Name {
    let hash = mix(CONTENT_SALT ^ NAME_HASH_SEED ^ mix(content_hash));
    Name(Arc::new(NameNode { hash, kind: NameKind::Content(content_hash) }))
}

/// A scope for names: the same name may be reused once per namespace.
#[derive(Clone)]
pub struct Namespace(Option<Arc<NsNode>>);

struct NsNode {
    hash: u64,
    parent: Namespace,
    seed: Name,
}

impl Namespace {
    pub fn top() -> Namespace {
        Namespace(None)
    }

    pub fn is_top(&self) -> bool {
        self.0.is_none()
    }

    #[inline]
    pub fn hash(&self) -> u64 {
        match &self.0 {
            None => TOP_HASH,
            Some(n) => n.hash,
        }
    }

    /// Enclosing namespace and seed, or `None` for the top.
    pub fn nested_parts(&self) -> Option<(&Namespace, &Name)> {
        self.0.as_ref().map(|n| (&n.parent, &n.seed))
    }

    /// `Nested(self, seed)`.
    pub fn nest(&self, seed: &Name) -> Namespace {
        Namespace(Some(Arc::new(NsNode {
            hash: mix(self.hash().rotate_left(23) ^ seed.hash() ^ TOP_HASH),
            parent: self.clone(),
            seed: seed.clone(),
        })))
    }
}

/// `Nested(current, seed)`.
pub fn make_namespace(current: &Namespace, seed: &Name) -> Namespace {
    current.nest(seed)
}

impl PartialEq for Namespace {
    fn eq(&self, other: &Self) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if x.hash != y.hash {
                        return false;
                    }
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.seed != y.seed {
                        return false;
                    }
                    a = &x.parent;
                    b = &y.parent;
                }
                _ => return false,
            }
        }
    }
}
impl Eq for Namespace {}

impl Hash for Namespace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash())
    }
}

impl Ord for Namespace {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(x), Some(y)) => x.parent.cmp(&y.parent).then_with(|| x.seed.cmp(&y.seed)),
        }
    }
}
impl PartialOrd for Namespace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            None => f.write_str("top"),
            Some(n) => write!(f, "{}/{}", n.parent, n.seed),
        }
    }
}

impl fmt::Debug for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Identity of a graph node: a name inside a namespace, or the sentinel for
/// the outer layer.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pointer {
    At(Name, Namespace),
    Root,
}

impl Pointer {
    pub fn at(name: Name, ns: Namespace) -> Pointer {
        Pointer::At(name, ns)
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            Pointer::At(n, _) => Some(n),
            Pointer::Root => None,
        }
    }

    pub fn namespace(&self) -> Option<&Namespace> {
        match self {
            Pointer::At(_, ns) => Some(ns),
            Pointer::Root => None,
        }
    }

    #[inline]
    pub fn hash64(&self) -> u64 {
        match self {
            Pointer::At(n, ns) => mix(n.hash() ^ ns.hash().rotate_left(17)),
            Pointer::Root => mix(NAME_HASH_SEED ^ 0xffff),
        }
    }
}

impl Hash for Pointer {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash64())
    }
}

impl fmt::Display for Pointer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pointer::At(n, ns) => write!(f, "{n}@{ns}"),
            Pointer::Root => f.write_str("root"),
        }
    }
}

impl fmt::Debug for Pointer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fork_of_root_renders_as_paths() {
        let (a, b) = fork(&Name::root());
        assert_eq!(a.to_string(), "•.1");
        assert_eq!(b.to_string(), "•.2");
        let (a1, a2) = fork(&a);
        assert_eq!(a1.to_string(), "•.1.1");
        assert_eq!(a2.to_string(), "•.1.2");
    }

    #[test]
    fn fork4_order() {
        let (a, b, c, d) = fork4(&Name::root());
        let got: Vec<String> = [a, b, c, d].iter().map(|n| n.to_string()).collect();
        assert_eq!(got, ["•.1.1", "•.1.2", "•.2.1", "•.2.2"]);
    }

    #[test]
    fn fresh_names_are_distinct_and_not_root() {
        let a = fresh_name();
        let b = fresh_name();
        assert_ne!(a, b);
        assert_ne!(a, Name::root());
        let many: std::collections::HashSet<Name> = (0..1000).map(|_| fresh_name()).collect();
        assert_eq!(many.len(), 1000);
    }

    #[test]
    fn content_names() {
        assert_eq!(name_of_content(42), name_of_content(42));
        assert_ne!(name_of_content(1), name_of_content(2));
        assert_ne!(name_of_content(7), fresh_name());
    }

    #[test]
    fn namespaces_compare_componentwise() {
        let (a, b) = Name::root().fork();
        let top = Namespace::top();
        assert_eq!(make_namespace(&top, &a), make_namespace(&top, &a));
        assert_ne!(make_namespace(&top, &a), make_namespace(&top, &b));
        assert_eq!(make_namespace(&top, &a).to_string(), "top/•.1");
        let p = Pointer::at(b.clone(), make_namespace(&top, &a));
        assert_eq!(p.to_string(), "•.2@top/•.1");
    }

    #[test]
    fn equal_hash_different_structure_is_unequal() {
        // Forge a node whose hash collides with another name.
        let real = Name::root().first();
        let forged = Name(Arc::new(NameNode { hash: real.hash(), kind: NameKind::Content(0) }));
        assert!(!name_eq(&real, &forged));
    }

    #[test]
    fn descends_from_and_depth() {
        let r = Name::root();
        let n = r.first().second().first();
        assert_eq!(n.depth(), 3);
        assert!(n.descends_from(&r.first()));
        assert!(!n.descends_from(&r.second()));
    }
}
