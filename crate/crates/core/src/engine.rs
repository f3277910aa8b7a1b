//! The user-facing incremental API: memoized functions coupled to
//! namespaces, named thunks and reference cells, demand-driven change
//! propagation and outer-layer mutation.
//!
//! Values stored in the graph are type-erased as [`Val`]; the typed handles
//! [`ARef`], [`AThunk`] and [`MemoFn`] restore the types at the API boundary.

use std::any::{type_name, Any};
use std::fmt::{self, Debug};
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;
use std::rc::Rc;

use rustc_hash::{FxHashMap, FxHasher};

use crate::dcg::{self, Action, Content, DcgError, Executor, Graph, GraphStats, NodeId, PutOutcome, Status, Violation};
use crate::names::{mix, name_of_content, Name, Namespace, Pointer};

/// Anything the engine can store, compare and hash.
pub trait Data: Any + Clone + Eq + Hash + Debug {}
impl<X: Any + Clone + Eq + Hash + Debug> Data for X {}

trait Erased: Any + Debug {
    fn as_any(&self) -> &dyn Any;
    fn eq_erased(&self, other: &dyn Erased) -> bool;
}

impl<X: Data> Erased for X {
    fn as_any(&self) -> &dyn Any {
        self
    }

    fn eq_erased(&self, other: &dyn Erased) -> bool {
        other.as_any().downcast_ref::<X>() == Some(self)
    }
}

/// A type-erased value with a precomputed content hash.
#[derive(Clone)]
pub struct Val {
    hash: u64,
    inner: Rc<dyn Erased>,
}

/// Deterministic content hash of a value, tagged by its type.
pub fn content_hash<X: Data>(x: &X) -> u64 {
    let mut h = FxHasher::default();
    type_name::<X>().hash(&mut h);
    x.hash(&mut h);
    mix(h.finish())
}

impl Val {
    pub fn new<X: Data>(x: X) -> Val {
        Val { hash: content_hash(&x), inner: Rc::new(x) }
    }

    pub fn hash64(&self) -> u64 {
        self.hash
    }

    pub fn downcast<X: Data>(&self) -> Option<&X> {
        self.inner.as_any().downcast_ref::<X>()
    }
}

impl PartialEq for Val {
    fn eq(&self, other: &Val) -> bool {
        self.hash == other.hash && (Rc::ptr_eq(&self.inner, &other.inner) || self.inner.eq_erased(&*other.inner))
    }
}

impl Eq for Val {}

impl Hash for Val {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl Debug for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.inner.fmt(f)
    }
}

/// A suspended call: which memoized function, applied to what.
#[derive(Clone, PartialEq, Debug)]
pub struct ThunkSpec {
    pub mfn: u32,
    pub arg: Val,
}

pub type EngineGraph = Graph<Val, ThunkSpec, Val>;

macro_rules! pointer_handle {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        pub struct $name<T> {
            ptr: Pointer,
            _t: PhantomData<fn() -> T>,
        }

        impl<T> $name<T> {
            fn new(ptr: Pointer) -> Self {
                $name { ptr, _t: PhantomData }
            }

            /// Reattach a handle to a known pointer.
            pub fn from_pointer(ptr: Pointer) -> Self {
                Self::new(ptr)
            }

            pub fn pointer(&self) -> &Pointer {
                &self.ptr
            }
        }

        impl<T> Clone for $name<T> {
            fn clone(&self) -> Self {
                Self::new(self.ptr.clone())
            }
        }

        impl<T> PartialEq for $name<T> {
            fn eq(&self, other: &Self) -> bool {
                self.ptr == other.ptr
            }
        }

        impl<T> Eq for $name<T> {}

        impl<T> Hash for $name<T> {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.ptr.hash(state)
            }
        }

        impl<T> Debug for $name<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.ptr)
            }
        }
    };
}

pointer_handle!(
    /// Handle to a named reference cell holding a `T`.
    ARef
);
pointer_handle!(
    /// Handle to a named thunk producing a `T`.
    AThunk
);

/// A memoized function from `A` to `R`, owning a namespace.
pub struct MemoFn<A, R> {
    id: u32,
    ns: Namespace,
    _t: PhantomData<fn(A) -> R>,
}

impl<A, R> MemoFn<A, R> {
    pub fn namespace(&self) -> &Namespace {
        &self.ns
    }
}

impl<A, R> Clone for MemoFn<A, R> {
    fn clone(&self) -> Self {
        MemoFn { id: self.id, ns: self.ns.clone(), _t: PhantomData }
    }
}

impl<A, R> PartialEq for MemoFn<A, R> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl<A, R> Eq for MemoFn<A, R> {}

impl<A, R> Hash for MemoFn<A, R> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl<A, R> Debug for MemoFn<A, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MemoFn({})", self.ns)
    }
}

/// How names are chosen and whether work is reused.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub enum Mode {
    /// Programmer-chosen names.
    #[default]
    Nominal,
    /// Names inside memoized bodies are derived from content hashes.
    Structural,
    /// No graph bookkeeping: every force runs its body.
    FromScratch,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Nominal, Mode::Structural, Mode::FromScratch];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Nominal => "nominal",
            Mode::Structural => "structural",
            Mode::FromScratch => "from-scratch",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.label() == s || m.label().replace('-', "") == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected nominal, structural or from-scratch)"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Monotone activity counters.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct Counters {
    /// Body executions.
    pub reexec: u64,
    /// Forces answered without running the forced body.
    pub hits: u64,
    /// Nodes created or overwritten.
    pub allocations: u64,
    /// Edges switched from clean to dirty.
    pub dirtied: u64,
}

impl std::ops::Sub for Counters {
    type Output = Counters;

    fn sub(self, rhs: Counters) -> Counters {
        Counters {
            reexec: self.reexec - rhs.reexec,
            hits: self.hits - rhs.hits,
            allocations: self.allocations - rhs.allocations,
            dirtied: self.dirtied - rhs.dirtied,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] DcgError),
    #[error("memo table {seed} was created for body `{existing}`, not `{requested}`")]
    BodyMismatch { seed: Name, existing: String, requested: String },
    #[error("{0} may only be set from the outer layer")]
    InnerMutation(Pointer),
    #[error("{pointer} does not hold a {expected}")]
    TypeMismatch { pointer: Pointer, expected: &'static str },
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

type Body = Rc<dyn Fn(&mut Engine, &Val) -> Result<Val>>;

struct Table {
    seed: Name,
    body_id: String,
    body_hash: u64,
    types: (std::any::TypeId, std::any::TypeId),
    ns: Namespace,
    body: Body,
    reexec: u64,
}

/// One incremental session. Not shareable across threads.
pub struct Engine {
    graph: EngineGraph,
    tables: Vec<Table>,
    by_seed: FxHashMap<Name, u32>,
    mode: Mode,
    counters: Counters,
    validate: bool,
    violations: Vec<Violation>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Mode::Nominal)
    }
}

impl Engine {
    pub fn new(mode: Mode) -> Engine {
        Engine {
            graph: Graph::new(),
            tables: Vec::new(),
            by_seed: FxHashMap::default(),
            mode,
            counters: Counters::default(),
            validate: cfg!(debug_assertions),
            violations: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn graph(&self) -> &EngineGraph {
        &self.graph
    }

    pub fn stats(&self) -> GraphStats {
        self.graph.stats()
    }

    /// Check graph well-formedness after every outer-layer force.
    pub fn set_validation(&mut self, on: bool) {
        self.validate = on;
    }

    /// Violations found by validation so far.
    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Body executions of one memoized function.
    pub fn reexec_of<A, R>(&self, m: &MemoFn<A, R>) -> u64 {
        self.tables[m.id as usize].reexec
    }

    /// Body executions of the memoized function created under `seed`.
    pub fn reexec_of_seed(&self, seed: &Name) -> u64 {
        self.by_seed.get(seed).map_or(0, |&i| self.tables[i as usize].reexec)
    }

    /// Create the memo table for `seed`, or return the existing one when it
    /// was made for the same body.
    pub fn mk_mfn<A: Data, R: Data>(
        &mut self,
        seed: Name,
        body_id: &str,
        body: impl Fn(&mut Engine, &MemoFn<A, R>, A) -> Result<R> + 'static,
    ) -> Result<MemoFn<A, R>> {
        let types = (std::any::TypeId::of::<A>(), std::any::TypeId::of::<R>());
        if let Some(&id) = self.by_seed.get(&seed) {
            let t = &self.tables[id as usize];
            if t.body_id != body_id || t.types != types {
                return Err(EngineError::BodyMismatch {
                    seed,
                    existing: t.body_id.clone(),
                    requested: body_id.to_owned(),
                });
            }
            return Ok(MemoFn { id, ns: t.ns.clone(), _t: PhantomData });
        }
        let id = self.tables.len() as u32;
        let ns = Namespace::top().nest(&seed);
        let handle = MemoFn::<A, R> { id, ns: ns.clone(), _t: PhantomData };
        let erased: Body = Rc::new(move |eng: &mut Engine, arg: &Val| {
            let a = arg.downcast::<A>().expect("argument type fixed by the memo table").clone();
            body(eng, &handle, a).map(Val::new)
        });
        self.tables.push(Table {
            seed: seed.clone(),
            body_id: body_id.to_owned(),
            body_hash: content_hash(&body_id.to_owned()),
            types,
            ns: ns.clone(),
            body: erased,
            reexec: 0,
        });
        self.by_seed.insert(seed, id);
        Ok(MemoFn { id, ns, _t: PhantomData })
    }

    fn call_name(&self, mfn: u32, arg: &Val) -> Name {
        name_of_content(mix(self.tables[mfn as usize].body_hash ^ arg.hash64()))
    }

    /// Namespace of the thunk currently running, or the top namespace.
    fn current_namespace(&self) -> Namespace {
        match self.graph.stack_top() {
            Some(id) => match self.graph.content(id) {
                Content::Thunk { comp, .. } => self.tables[comp.mfn as usize].ns.clone(),
                _ => Namespace::top(),
            },
            None => Namespace::top(),
        }
    }

    fn note_put(&mut self, outcome: PutOutcome) {
        match outcome {
            PutOutcome::Created => self.counters.allocations += 1,
            PutOutcome::Overwritten { dirtied } => {
                self.counters.allocations += 1;
                self.counters.dirtied += dirtied;
            }
            PutOutcome::Unchanged | PutOutcome::Reused => {}
        }
    }

    fn node_of(&self, p: &Pointer) -> Result<NodeId> {
        self.graph.lookup(p).ok_or_else(|| DcgError::Missing(p.clone()).into())
    }

    /// Allocate (or reuse) the thunk named `k` in `m`'s namespace.
    pub fn thunk<A: Data, R: Data>(&mut self, m: &MemoFn<A, R>, k: Name, arg: A) -> Result<AThunk<R>> {
        let arg = Val::new(arg);
        let k = match self.mode {
            Mode::Structural => self.call_name(m.id, &arg),
            _ => k,
        };
        self.thunk_at(m.id, Pointer::at(k, m.ns.clone()), arg).map(AThunk::new)
    }

    fn thunk_at(&mut self, mfn: u32, p: Pointer, arg: Val) -> Result<Pointer> {
        let spec = ThunkSpec { mfn, arg };
        if self.mode == Mode::FromScratch {
            self.graph.put_thunk_untracked(&p, spec)?;
            self.counters.allocations += 1;
            return Ok(p);
        }
        let (id, outcome) = self.graph.put_thunk(&p, spec.clone())?;
        self.note_put(outcome);
        if outcome == PutOutcome::Reused
            && self.graph.cache(id).is_some()
            && !self.graph.all_clean_out(id)
            && !self.graph.is_on_stack(id)
        {
            // A reused node with stale dependencies is brought up to date now,
            // so the clean allocation edge below never points at dirt.
            dcg::refresh(self, id)?;
        }
        let ctx = self.graph.context();
        self.graph.add_edge(ctx, Action::AllocThunk(spec), Status::Clean, id);
        Ok(p)
    }

    /// Demand a thunk's result, repairing or running it as needed.
    pub fn force<R: Data>(&mut self, t: &AThunk<R>) -> Result<R> {
        let v = self.force_val(&t.ptr)?;
        v.downcast::<R>()
            .cloned()
            .ok_or_else(|| EngineError::TypeMismatch { pointer: t.ptr.clone(), expected: type_name::<R>() })
    }

    fn force_val(&mut self, p: &Pointer) -> Result<Val> {
        let id = self.node_of(p)?;
        if self.graph.is_on_stack(id) {
            return Err(DcgError::Cycle(p.clone()).into());
        }
        if self.mode == Mode::FromScratch {
            let Content::Thunk { comp, .. } = self.graph.content(id) else {
                return Err(EngineError::TypeMismatch { pointer: p.clone(), expected: "thunk" });
            };
            let spec = comp.clone();
            return self.run_body(id, &spec);
        }
        if !matches!(self.graph.content(id), Content::Thunk { .. }) {
            return Err(EngineError::TypeMismatch { pointer: p.clone(), expected: "thunk" });
        }
        let ran = dcg::refresh(self, id)?;
        if !ran {
            self.counters.hits += 1;
        }
        let result = self.graph.cache(id).expect("refreshed thunk has a cache").clone();
        let ctx = self.graph.context();
        self.graph.add_edge(ctx, Action::ObsThunk(result.clone()), Status::Clean, id);
        if ctx == NodeId::ROOT && self.validate {
            let found = self.graph.check_well_formed();
            self.violations.extend(found);
        }
        Ok(result)
    }

    fn run_body(&mut self, id: NodeId, spec: &ThunkSpec) -> Result<Val> {
        let body = Rc::clone(&self.tables[spec.mfn as usize].body);
        self.graph.push_force(id);
        let out = body(self, &spec.arg);
        self.graph.pop_force();
        self.counters.reexec += 1;
        self.tables[spec.mfn as usize].reexec += 1;
        self.graph.note_execution();
        out
    }

    /// Allocate (or rewrite) the reference cell named `k`.
    pub fn aref<T: Data>(&mut self, k: Name, v: T) -> Result<ARef<T>> {
        let v = Val::new(v);
        let inner = self.graph.stack_depth() > 0;
        let k = match self.mode {
            Mode::Structural if inner => name_of_content(v.hash64()),
            _ => k,
        };
        let p = Pointer::at(k, self.current_namespace());
        if self.mode == Mode::FromScratch {
            self.graph.put_ref_untracked(&p, v)?;
            self.counters.allocations += 1;
            return Ok(ARef::new(p));
        }
        let (id, outcome) = self.graph.put_ref(&p, v.clone())?;
        self.note_put(outcome);
        let ctx = self.graph.context();
        self.graph.add_edge(ctx, Action::AllocRef(v), Status::Clean, id);
        Ok(ARef::new(p))
    }

    fn ref_val(&self, r: &Pointer) -> Result<(NodeId, Val)> {
        let id = self.node_of(r)?;
        match self.graph.content(id) {
            Content::Ref(v) => Ok((id, v.clone())),
            _ => Err(EngineError::TypeMismatch { pointer: r.clone(), expected: "reference cell" }),
        }
    }

    fn typed<T: Data>(p: &Pointer, v: &Val) -> Result<T> {
        v.downcast::<T>()
            .cloned()
            .ok_or_else(|| EngineError::TypeMismatch { pointer: p.clone(), expected: type_name::<T>() })
    }

    /// Read a reference cell, recording the observation.
    pub fn get<T: Data>(&mut self, r: &ARef<T>) -> Result<T> {
        let (id, v) = self.ref_val(&r.ptr)?;
        if self.mode != Mode::FromScratch {
            let ctx = self.graph.context();
            self.graph.add_edge(ctx, Action::ObsRef(v.clone()), Status::Clean, id);
        }
        Self::typed(&r.ptr, &v)
    }

    /// Read a reference cell without recording anything.
    pub fn peek<T: Data>(&self, r: &ARef<T>) -> Result<T> {
        let (_, v) = self.ref_val(&r.ptr)?;
        Self::typed(&r.ptr, &v)
    }

    /// Change a reference cell from the outer layer.
    pub fn set<T: Data>(&mut self, r: &ARef<T>, v: T) -> Result<()> {
        if self.graph.stack_depth() > 0 {
            return Err(EngineError::InnerMutation(r.ptr.clone()));
        }
        self.ref_val(&r.ptr)?;
        let v = Val::new(v);
        if self.mode == Mode::FromScratch {
            self.graph.put_ref_untracked(&r.ptr, v)?;
            return Ok(());
        }
        let (_, outcome) = self.graph.put_ref(&r.ptr, v)?;
        self.note_put(outcome);
        Ok(())
    }

    /// Memoized application under a content-derived name.
    pub fn call<A: Data, R: Data>(&mut self, m: &MemoFn<A, R>, arg: A) -> Result<R> {
        let arg = Val::new(arg);
        let k = self.call_name(m.id, &arg);
        let p = self.thunk_at(m.id, Pointer::at(k, m.ns.clone()), arg)?;
        self.force(&AThunk::new(p))
    }

    /// Pin a node so [`Engine::flush`] keeps it.
    pub fn incref(&mut self, p: &Pointer) -> Result<()> {
        let id = self.node_of(p)?;
        self.graph.incref(id);
        Ok(())
    }

    pub fn decref(&mut self, p: &Pointer) -> Result<()> {
        let id = self.node_of(p)?;
        self.graph.decref(id);
        Ok(())
    }

    /// Drop nodes nothing refers to.
    pub fn flush(&mut self) -> usize {
        self.graph.flush()
    }

    /// Seed of each memo table, in creation order.
    pub fn table_seeds(&self) -> impl Iterator<Item = &Name> {
        self.tables.iter().map(|t| &t.seed)
    }
}

impl Executor<Val, ThunkSpec, Val> for Engine {
    type Error = EngineError;

    fn graph(&mut self) -> &mut EngineGraph {
        &mut self.graph
    }

    fn execute(&mut self, id: NodeId) -> Result<()> {
        let spec = match self.graph.content(id) {
            Content::Thunk { comp, .. } => comp.clone(),
            _ => return Err(EngineError::TypeMismatch { pointer: self.graph.pointer(id).clone(), expected: "thunk" }),
        };
        self.graph.delete_edges_out(id);
        let result = self.run_body(id, &spec)?;
        if !self.graph.all_clean_out(id) {
            return Err(DcgError::AmbiguousName {
                pointer: self.graph.pointer(id).clone(),
                previous: format!("{:?}", spec.arg),
                current: "dependencies dirtied during execution".into(),
            }
            .into());
        }
        self.graph.set_cache(id, result);
        Ok(())
    }
}
