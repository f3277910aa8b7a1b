//! Big-step evaluation under a plain store (the reference system) and under
//! a demanded computation graph (the incremental system).
//!
//! Both systems share [`eval`]; they differ only in how they allocate, read
//! and force, which is what [`System`] abstracts. The incremental system
//! records edges, caches thunk results, and repairs stale thunks through
//! [`nominal_core::dcg::refresh`], so its choice of which dependency to fix up
//! next, and when to clean an edge, is exactly the engine's.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nominal_core::dcg::{refresh, Action, Content, Executor, Status};
use nominal_core::{DcgError, Graph, Namespace, NodeId, Pointer};

use crate::syntax::{Computation, Terminal, Value};

/// The incremental system's graph: cells hold values, thunks suspend
/// computations and cache terminals.
pub type CalcGraph = Graph<Value, Computation, Terminal>;

/// What a plain store maps a pointer to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StoreEntry {
    Val(Value),
    Comp(Computation),
}

impl fmt::Display for StoreEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreEntry::Val(v) => write!(f, "{v}"),
            StoreEntry::Comp(e) => write!(f, "{e}"),
        }
    }
}

/// An edge-free graph without cached results.
pub type PlainStore = BTreeMap<Pointer, StoreEntry>;

pub type PointerSet = BTreeSet<Pointer>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalcError {
    #[error("no rule applies: {0}")]
    Stuck(String),
    #[error("pointer {0} is already allocated")]
    PointerCollision(Pointer),
    #[error("fixed points unrolled deeper than {0}")]
    FixDepth(u32),
    #[error(transparent)]
    Graph(#[from] DcgError),
}

impl CalcError {
    pub fn is_ambiguous_name(&self) -> bool {
        matches!(self, CalcError::Graph(DcgError::AmbiguousName { .. }))
    }
}

pub type Result<T> = std::result::Result<T, CalcError>;

/// Evaluation rules, used to count how often each fires.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    Term,
    App,
    Fix,
    Bind,
    Case,
    Split,
    Fork,
    Namespace,
    Nest,
    RefPlain,
    ThunkPlain,
    GetPlain,
    ForcePlain,
    RefDirty,
    RefClean,
    ThunkDirty,
    ThunkClean,
    GetClean,
    ForceClean,
    ScrubEdge,
    ComputeDep,
}

impl Rule {
    pub const ALL: [Rule; 21] = [
        Rule::Term,
        Rule::App,
        Rule::Fix,
        Rule::Bind,
        Rule::Case,
        Rule::Split,
        Rule::Fork,
        Rule::Namespace,
        Rule::Nest,
        Rule::RefPlain,
        Rule::ThunkPlain,
        Rule::GetPlain,
        Rule::ForcePlain,
        Rule::RefDirty,
        Rule::RefClean,
        Rule::ThunkDirty,
        Rule::ThunkClean,
        Rule::GetClean,
        Rule::ForceClean,
        Rule::ScrubEdge,
        Rule::ComputeDep,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Rule::Term => "term",
            Rule::App => "app",
            Rule::Fix => "fix",
            Rule::Bind => "bind",
            Rule::Case => "case",
            Rule::Split => "split",
            Rule::Fork => "fork",
            Rule::Namespace => "namespace",
            Rule::Nest => "nest",
            Rule::RefPlain => "ref-plain",
            Rule::ThunkPlain => "thunk-plain",
            Rule::GetPlain => "get-plain",
            Rule::ForcePlain => "force-plain",
            Rule::RefDirty => "ref-dirty",
            Rule::RefClean => "ref-clean",
            Rule::ThunkDirty => "thunk-dirty",
            Rule::ThunkClean => "thunk-clean",
            Rule::GetClean => "get-clean",
            Rule::ForceClean => "force-clean",
            Rule::ScrubEdge => "scrub-edge",
            Rule::ComputeDep => "compute-dep",
        }
    }

    /// Whether the rule belongs to the reference system only.
    pub fn is_plain(self) -> bool {
        matches!(self, Rule::RefPlain | Rule::ThunkPlain | Rule::GetPlain | Rule::ForcePlain)
    }

    /// Whether the rule belongs to the incremental system only.
    pub fn is_incremental(self) -> bool {
        self >= Rule::RefDirty
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-rule application counts.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct RuleHits([u64; Rule::ALL.len()]);

impl RuleHits {
    pub fn get(&self, r: Rule) -> u64 {
        self.0[r as usize]
    }

    pub fn bump(&mut self, r: Rule) {
        self.0[r as usize] += 1;
    }

    fn add(&mut self, r: Rule, n: u64) {
        self.0[r as usize] += n;
    }

    pub fn merge(&mut self, other: &RuleHits) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }

    /// Rules that never fired.
    pub fn missing(&self) -> Vec<Rule> {
        Rule::ALL.into_iter().filter(|&r| self.get(r) == 0).collect()
    }
}

impl fmt::Display for RuleHits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in Rule::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{r}={}", self.get(*r))?;
        }
        Ok(())
    }
}

/// The operations the two rule systems disagree on.
trait System {
    type Ctx: Copy;

    fn hits(&mut self) -> &mut RuleHits;
    fn fix_depth(&mut self) -> (&mut u32, Option<u32>);
    fn alloc_ref(&mut self, p: Self::Ctx, q: Pointer, v: Value) -> Result<()>;
    fn alloc_thunk(&mut self, p: Self::Ctx, q: Pointer, e: Computation) -> Result<()>;
    fn get(&mut self, p: Self::Ctx, q: &Pointer) -> Result<Value>;
    fn force(&mut self, p: Self::Ctx, q: &Pointer) -> Result<Terminal>;
}

fn stuck<T>(what: &str, v: &dyn fmt::Display) -> Result<T> {
    Err(CalcError::Stuck(format!("{what}: {v}")))
}

fn namespace_of(q: &Pointer) -> Namespace {
    q.namespace().cloned().unwrap_or_else(Namespace::top)
}

fn eval<S: System>(s: &mut S, p: S::Ctx, ns: &Namespace, e: &Computation) -> Result<Terminal> {
    let mut unrolled = 0;
    let out = eval_frame(s, p, ns, e.clone(), &mut unrolled);
    *s.fix_depth().0 -= unrolled;
    out
}

/// Evaluate with tail positions handled by looping; `unrolled` counts the
/// fixed points opened in this frame.
fn eval_frame<S: System>(s: &mut S, p: S::Ctx, ns: &Namespace, e: Computation, unrolled: &mut u32) -> Result<Terminal> {
    use Computation as C;
    let mut cur = e;
    loop {
        cur = match cur {
            C::Term(t) => {
                s.hits().bump(Rule::Term);
                return Ok(t);
            }
            C::App(f, v) => {
                s.hits().bump(Rule::App);
                match eval(s, p, ns, &f)? {
                    Terminal::Lam(x, body) => body.subst(&x, &v),
                    t => return stuck("applying a non-function", &t),
                }
            }
            C::FixVar(f) => return stuck("unbound fixed-point variable", &f),
            C::Fix(f, body) => {
                s.hits().bump(Rule::Fix);
                let (depth, bound) = s.fix_depth();
                *depth += 1;
                *unrolled += 1;
                if let Some(b) = bound {
                    if *depth > b {
                        return Err(CalcError::FixDepth(b));
                    }
                }
                let whole = C::Fix(f.clone(), body.clone());
                body.subst_fix(&f, &whole)
            }
            C::Let(x, e1, e2) => {
                s.hits().bump(Rule::Bind);
                match eval(s, p, ns, &e1)? {
                    Terminal::Ret(v) => e2.subst(&x, &v),
                    t => return stuck("binding a non-value result", &t),
                }
            }
            C::Case(v, x1, e1, x2, e2) => {
                s.hits().bump(Rule::Case);
                match &v {
                    Value::Inj(1, w) => e1.subst(&x1, w),
                    Value::Inj(2, w) => e2.subst(&x2, w),
                    _ => return stuck("case on a non-injection", &v),
                }
            }
            C::Split(v, x1, x2, body) => {
                s.hits().bump(Rule::Split);
                match &v {
                    Value::Pair(a, b) if x1 == x2 => body.subst(&x2, b),
                    Value::Pair(a, b) => body.subst(&x1, a).subst(&x2, b),
                    _ => return stuck("split on a non-pair", &v),
                }
            }
            C::Thunk(v, body) => {
                let Value::Name(k) = &v else { return stuck("thunk named by a non-name", &v) };
                let q = Pointer::at(k.clone(), ns.clone());
                s.alloc_thunk(p, q.clone(), (*body).clone())?;
                return Ok(Terminal::Ret(Value::Thk(q)));
            }
            C::Force(v) => {
                let Value::Thk(q) = &v else { return stuck("forcing a non-thunk", &v) };
                return s.force(p, q);
            }
            C::Fork(v) => {
                let Value::Name(k) = &v else { return stuck("forking a non-name", &v) };
                s.hits().bump(Rule::Fork);
                let (k1, k2) = k.fork();
                return Ok(Terminal::Ret(Value::pair(Value::Name(k1), Value::Name(k2))));
            }
            C::Ref(v1, v2) => {
                let Value::Name(k) = &v1 else { return stuck("reference named by a non-name", &v1) };
                let q = Pointer::at(k.clone(), ns.clone());
                s.alloc_ref(p, q.clone(), v2)?;
                return Ok(Terminal::Ret(Value::Ref(q)));
            }
            C::Get(v) => {
                let Value::Ref(q) = &v else { return stuck("reading a non-reference", &v) };
                return Ok(Terminal::Ret(s.get(p, q)?));
            }
            C::Ns(v, x, body) => {
                let Value::Name(k) = &v else { return stuck("namespace from a non-name", &v) };
                s.hits().bump(Rule::Namespace);
                body.subst(&x, &Value::Ns(ns.nest(k)))
            }
            C::Nest(v, e1, x, e2) => {
                let Value::Ns(mu) = &v else { return stuck("nesting in a non-namespace", &v) };
                s.hits().bump(Rule::Nest);
                match eval(s, p, mu, &e1)? {
                    Terminal::Ret(w) => e2.subst(&x, &w),
                    t => return stuck("nested computation returned a non-value", &t),
                }
            }
        };
    }
}

/// The reference system over a plain store.
#[derive(Clone, Debug, Default)]
pub struct Reference {
    store: PlainStore,
    hits: RuleHits,
    fix_bound: Option<u32>,
    fix_depth: u32,
}

impl Reference {
    pub fn new(store: PlainStore) -> Self {
        Reference { store, ..Default::default() }
    }

    /// Fail with [`CalcError::FixDepth`] past `bound` nested unrollings.
    pub fn with_fix_bound(mut self, bound: u32) -> Self {
        self.fix_bound = Some(bound);
        self
    }

    pub fn eval(&mut self, ns: &Namespace, e: &Computation) -> Result<Terminal> {
        eval(self, (), ns, e)
    }

    pub fn store(&self) -> &PlainStore {
        &self.store
    }

    pub fn into_store(self) -> PlainStore {
        self.store
    }

    pub fn hits(&self) -> &RuleHits {
        &self.hits
    }
}

impl System for Reference {
    type Ctx = ();

    fn hits(&mut self) -> &mut RuleHits {
        &mut self.hits
    }

    fn fix_depth(&mut self) -> (&mut u32, Option<u32>) {
        (&mut self.fix_depth, self.fix_bound)
    }

    fn alloc_ref(&mut self, _: (), q: Pointer, v: Value) -> Result<()> {
        if self.store.contains_key(&q) {
            return Err(CalcError::PointerCollision(q));
        }
        self.hits.bump(Rule::RefPlain);
        self.store.insert(q, StoreEntry::Val(v));
        Ok(())
    }

    fn alloc_thunk(&mut self, _: (), q: Pointer, e: Computation) -> Result<()> {
        if self.store.contains_key(&q) {
            return Err(CalcError::PointerCollision(q));
        }
        self.hits.bump(Rule::ThunkPlain);
        self.store.insert(q, StoreEntry::Comp(e));
        Ok(())
    }

    fn get(&mut self, _: (), q: &Pointer) -> Result<Value> {
        match self.store.get(q) {
            Some(StoreEntry::Val(v)) => {
                self.hits.bump(Rule::GetPlain);
                Ok(v.clone())
            }
            Some(StoreEntry::Comp(_)) => stuck("reading a thunk pointer", q),
            None => stuck("reading an unallocated pointer", q),
        }
    }

    fn force(&mut self, _: (), q: &Pointer) -> Result<Terminal> {
        let e = match self.store.get(q) {
            Some(StoreEntry::Comp(e)) => e.clone(),
            Some(StoreEntry::Val(_)) => return stuck("forcing a reference pointer", q),
            None => return stuck("forcing an unallocated pointer", q),
        };
        self.hits.bump(Rule::ForcePlain);
        eval(self, (), &namespace_of(q), &e)
    }
}

/// The incremental system over a demanded computation graph.
#[derive(Default)]
pub struct Incremental {
    graph: CalcGraph,
    hits: RuleHits,
    fix_bound: Option<u32>,
    fix_depth: u32,
}

impl Incremental {
    pub fn new(graph: CalcGraph) -> Self {
        Incremental { graph, ..Default::default() }
    }

    pub fn with_fix_bound(mut self, bound: u32) -> Self {
        self.fix_bound = Some(bound);
        self
    }

    /// Evaluate `e` as part of the thunk at `p`, which must be in the graph
    /// (the outer layer is [`Pointer::Root`]).
    pub fn eval(&mut self, p: &Pointer, ns: &Namespace, e: &Computation) -> Result<Terminal> {
        let Some(id) = self.graph.lookup(p) else { return stuck("evaluating for an unallocated pointer", p) };
        eval(self, id, ns, e)
    }

    /// Outer-layer edit: overwrite a reference cell and dirty every path into
    /// it. Returns how many edges were dirtied.
    pub fn overwrite(&mut self, q: &Pointer, v: Value) -> Result<u64> {
        match self.graph.lookup(q).map(|id| self.graph.content(id)) {
            Some(Content::Ref(_)) => {}
            _ => return stuck("overwriting something other than a reference", q),
        }
        Ok(match self.graph.put_ref(q, v)?.1 {
            nominal_core::PutOutcome::Overwritten { dirtied } => dirtied,
            _ => 0,
        })
    }

    pub fn graph(&self) -> &CalcGraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut CalcGraph {
        &mut self.graph
    }

    pub fn into_graph(self) -> CalcGraph {
        self.graph
    }

    pub fn hits(&self) -> &RuleHits {
        &self.hits
    }
}

impl System for Incremental {
    type Ctx = NodeId;

    fn hits(&mut self) -> &mut RuleHits {
        &mut self.hits
    }

    fn fix_depth(&mut self) -> (&mut u32, Option<u32>) {
        (&mut self.fix_depth, self.fix_bound)
    }

    fn alloc_ref(&mut self, p: NodeId, q: Pointer, v: Value) -> Result<()> {
        let (id, outcome) = self.graph.put_ref(&q, v.clone())?;
        let rule = if outcome == nominal_core::PutOutcome::Unchanged { Rule::RefClean } else { Rule::RefDirty };
        self.hits.bump(rule);
        self.graph.add_edge(p, Action::AllocRef(v), Status::Clean, id);
        Ok(())
    }

    fn alloc_thunk(&mut self, p: NodeId, q: Pointer, e: Computation) -> Result<()> {
        let (id, outcome) = self.graph.put_thunk(&q, e.clone())?;
        let rule = if outcome == nominal_core::PutOutcome::Reused { Rule::ThunkClean } else { Rule::ThunkDirty };
        self.hits.bump(rule);
        self.graph.add_edge(p, Action::AllocThunk(e), Status::Clean, id);
        Ok(())
    }

    fn get(&mut self, p: NodeId, q: &Pointer) -> Result<Value> {
        let Some(id) = self.graph.lookup(q) else { return stuck("reading an unallocated pointer", q) };
        let Content::Ref(v) = self.graph.content(id) else { return stuck("reading a thunk pointer", q) };
        let v = v.clone();
        self.hits.bump(Rule::GetClean);
        self.graph.add_edge(p, Action::ObsRef(v.clone()), Status::Clean, id);
        Ok(v)
    }

    fn force(&mut self, p: NodeId, q: &Pointer) -> Result<Terminal> {
        let Some(id) = self.graph.lookup(q) else { return stuck("forcing an unallocated pointer", q) };
        if !matches!(self.graph.content(id), Content::Thunk { .. }) {
            return stuck("forcing a reference pointer", q);
        }
        let scrubs = self.graph.scrubs();
        refresh(self, id)?;
        let cleaned = self.graph.scrubs() - scrubs;
        self.hits.add(Rule::ScrubEdge, cleaned);
        self.hits.bump(Rule::ForceClean);
        let t = self.graph.cache(id).expect("refreshed thunk has a result").clone();
        self.graph.add_edge(p, Action::ObsThunk(t.clone()), Status::Clean, id);
        Ok(t)
    }
}

impl Executor<Value, Computation, Terminal> for Incremental {
    type Error = CalcError;

    fn graph(&mut self) -> &mut CalcGraph {
        &mut self.graph
    }

    fn execute(&mut self, id: NodeId) -> Result<()> {
        self.hits.bump(Rule::ComputeDep);
        let g = &mut self.graph;
        let Content::Thunk { comp, .. } = g.content(id) else { unreachable!("only thunks execute") };
        let e = comp.clone();
        let q = g.pointer(id).clone();
        g.clear_cache(id);
        g.delete_edges_out(id);
        g.push_force(id);
        g.note_execution();
        let out = eval(self, id, &namespace_of(&q), &e);
        self.graph.pop_force();
        let t = out?;
        if !self.graph.all_clean_out(id) {
            return Err(DcgError::AmbiguousName {
                pointer: q,
                previous: format!("{e}"),
                current: "a dependency was overwritten during this evaluation".into(),
            }
            .into());
        }
        self.graph.set_cache(id, t);
        Ok(())
    }
}

/// Run the reference system once, from `store`.
pub fn eval_ref(store: PlainStore, ns: &Namespace, e: &Computation) -> Result<(PlainStore, Terminal)> {
    let mut r = Reference::new(store);
    let t = r.eval(ns, e)?;
    Ok((r.into_store(), t))
}

/// Run the incremental system once, as part of the thunk at `p`.
pub fn eval_inc(graph: CalcGraph, p: &Pointer, ns: &Namespace, e: &Computation) -> Result<(CalcGraph, Terminal)> {
    let mut inc = Incremental::new(graph);
    let t = inc.eval(p, ns, e)?;
    Ok((inc.into_graph(), t))
}

/// Pointers the graph maps, excluding the outer-layer sentinel.
pub fn domain(g: &CalcGraph) -> PointerSet {
    g.node_ids()
        .filter_map(|id| match g.pointer(id) {
            Pointer::Root => None,
            p => Some(p.clone()),
        })
        .collect()
}

/// Keep the nodes in `keep`, forget cached results and drop every edge.
pub fn restrict(g: &CalcGraph, keep: &PointerSet) -> PlainStore {
    keep.iter()
        .filter_map(|p| {
            let id = g.lookup(p)?;
            let entry = match g.content(id) {
                Content::Root => return None,
                Content::Ref(v) => StoreEntry::Val(v.clone()),
                Content::Thunk { comp, .. } => StoreEntry::Comp(comp.clone()),
            };
            Some((p.clone(), entry))
        })
        .collect()
}

/// The first pointer of `small` that `big` lacks or maps differently.
pub fn embedding_gap(small: &PlainStore, big: &PlainStore) -> Option<Pointer> {
    small.iter().find(|(p, entry)| big.get(*p) != Some(entry)).map(|(p, _)| p.clone())
}

/// Build a plain store from reference cells.
pub fn store_of_refs<I: IntoIterator<Item = (Pointer, Value)>>(cells: I) -> PlainStore {
    cells.into_iter().map(|(p, v)| (p, StoreEntry::Val(v))).collect()
}
