//! The demanded computation graph.
//!
//! Nodes are reference cells or thunks addressed by [`Pointer`]. Edges record
//! that a thunk (or the outer layer, via [`Pointer::Root`]) allocated or
//! observed another node, and carry a clean/dirty status. Mutation dirties
//! every edge on a path into the changed node; demand cleans edges again by
//! verifying or re-executing their targets, see [`refresh`].
//!
//! The graph is generic over what reference cells hold (`V`), what thunks
//! suspend (`C`) and what forcing a thunk yields (`T`), so the engine and the
//! calculus interpreter share one implementation.

use std::fmt::{self, Debug, Write as _};

use rustc_hash::FxHashMap;

use crate::names::Pointer;

/// Bounds shared by all graph payloads.
pub trait Payload: Clone + PartialEq + Debug {}
impl<X: Clone + PartialEq + Debug> Payload for X {}

/// Dense handle of a live node. Handles are recycled after [`Graph::flush`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(u32);

impl NodeId {
    /// The outer-layer context.
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense handle of a live edge.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeId(u32);

#[derive(Clone, Debug, PartialEq)]
pub enum Content<V, C, T> {
    /// The outer-layer sentinel.
    Root,
    Ref(V),
    Thunk { comp: C, cache: Option<T> },
}

impl<V, C, T> Content<V, C, T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Content::Root => "root",
            Content::Ref(_) => "ref",
            Content::Thunk { .. } => "thunk",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action<V, C, T> {
    AllocRef(V),
    AllocThunk(C),
    ObsRef(V),
    ObsThunk(T),
}

impl<V, C, T> Action<V, C, T> {
    pub fn is_alloc(&self) -> bool {
        matches!(self, Action::AllocRef(_) | Action::AllocThunk(_))
    }

    pub fn targets_thunk(&self) -> bool {
        matches!(self, Action::AllocThunk(_) | Action::ObsThunk(_))
    }

    fn label(&self) -> &'static str {
        match self {
            Action::AllocRef(_) => "alloc",
            Action::AllocThunk(_) => "alloc",
            Action::ObsRef(_) => "obs",
            Action::ObsThunk(_) => "obs",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Clean,
    Dirty,
}

#[derive(Clone, Debug)]
pub struct Edge<V, C, T> {
    pub source: NodeId,
    pub target: NodeId,
    pub action: Action<V, C, T>,
    pub status: Status,
    out_pos: u32,
    in_pos: u32,
}

#[derive(Clone, Debug)]
struct Node<V, C, T> {
    ptr: Pointer,
    content: Content<V, C, T>,
    out: Vec<EdgeId>,
    inc: Vec<EdgeId>,
    dirty_out: u32,
    on_stack: bool,
    pins: u32,
    epoch: u32,
    mark: u32,
}

/// Result of writing a node.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PutOutcome {
    Created,
    /// A reference cell already held an equal value.
    Unchanged,
    /// A thunk already suspended an equal computation.
    Reused,
    /// Contents replaced; `dirtied` edges changed from clean to dirty.
    Overwritten { dirtied: u64 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scrub {
    Cleaned,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DcgError {
    #[error("{pointer} already holds a {existing}")]
    NameKindClash { pointer: Pointer, existing: &'static str },
    #[error("name {pointer} is used ambiguously: {previous} then {current}")]
    AmbiguousName { pointer: Pointer, previous: String, current: String },
    #[error("no node at {0}")]
    Missing(Pointer),
    #[error("{0} depends on itself")]
    Cycle(Pointer),
}

/// A broken well-formedness rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Size and activity summary, one CSV row per snapshot.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub dirty_edges: usize,
    pub executions: u64,
}

impl GraphStats {
    pub const CSV_HEADER: &'static str = "nodes,edges,dirty_edges,reexec";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.nodes, self.edges, self.dirty_edges, self.executions)
    }
}

/// Node store plus dependency edges, force stack and reference counts.
#[derive(Clone)]
pub struct Graph<V, C, T> {
    nodes: Vec<Option<Node<V, C, T>>>,
    free_nodes: Vec<u32>,
    index: FxHashMap<Pointer, NodeId>,
    edges: Vec<Option<Edge<V, C, T>>>,
    free_edges: Vec<u32>,
    live_edges: usize,
    stack: Vec<NodeId>,
    generation: u32,
    executions: u64,
    scrubs: u64,
}

impl<V: Payload, C: Payload, T: Payload> Default for Graph<V, C, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Payload, C: Payload, T: Payload> Graph<V, C, T> {
    pub fn new() -> Self {
        let root = Node {
            ptr: Pointer::Root,
            content: Content::Root,
            out: Vec::new(),
            inc: Vec::new(),
            dirty_out: 0,
            on_stack: false,
            pins: 0,
            epoch: 0,
            mark: 0,
        };
        let mut index = FxHashMap::default();
        index.insert(Pointer::Root, NodeId::ROOT);
        Graph {
            nodes: vec![Some(root)],
            free_nodes: Vec::new(),
            index,
            edges: Vec::new(),
            free_edges: Vec::new(),
            live_edges: 0,
            stack: Vec::new(),
            generation: 0,
            executions: 0,
            scrubs: 0,
        }
    }

    #[inline]
    fn node(&self, id: NodeId) -> &Node<V, C, T> {
        self.nodes[id.index()].as_ref().expect("live node")
    }

    #[inline]
    fn node_mut(&mut self, id: NodeId) -> &mut Node<V, C, T> {
        self.nodes[id.index()].as_mut().expect("live node")
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge<V, C, T> {
        self.edges[e.0 as usize].as_ref().expect("live edge")
    }

    #[inline]
    fn edge_mut(&mut self, e: EdgeId) -> &mut Edge<V, C, T> {
        self.edges[e.0 as usize].as_mut().expect("live edge")
    }

    pub fn lookup(&self, p: &Pointer) -> Option<NodeId> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Pointer) -> bool {
        self.index.contains_key(p)
    }

    pub fn pointer(&self, id: NodeId) -> &Pointer {
        &self.node(id).ptr
    }

    pub fn content(&self, id: NodeId) -> &Content<V, C, T> {
        &self.node(id).content
    }

    pub fn is_live(&self, id: NodeId) -> bool {
        self.nodes.get(id.index()).is_some_and(Option::is_some)
    }

    /// The cached result of a thunk node.
    pub fn cache(&self, id: NodeId) -> Option<&T> {
        match &self.node(id).content {
            Content::Thunk { cache, .. } => cache.as_ref(),
            _ => None,
        }
    }

    pub fn set_cache(&mut self, id: NodeId, t: T) {
        if let Content::Thunk { cache, .. } = &mut self.node_mut(id).content {
            *cache = Some(t);
        }
    }

    /// Drop a thunk's cached result, keeping its computation.
    pub fn clear_cache(&mut self, id: NodeId) {
        if let Content::Thunk { cache, .. } = &mut self.node_mut(id).content {
            *cache = None;
        }
    }

    pub fn out_edges(&self, id: NodeId) -> &[EdgeId] {
        &self.node(id).out
    }

    pub fn in_edges(&self, id: NodeId) -> &[EdgeId] {
        &self.node(id).inc
    }

    /// Bumped whenever the node's outgoing edges are deleted.
    pub fn epoch(&self, id: NodeId) -> u32 {
        self.node(id).epoch
    }

    pub fn node_count(&self) -> usize {
        self.index.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.live_edges
    }

    /// Live nodes other than the root, in slot order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| NodeId(i as u32))
    }

    fn alloc_node(&mut self, ptr: Pointer, content: Content<V, C, T>) -> NodeId {
        let node = Node {
            ptr: ptr.clone(),
            content,
            out: Vec::new(),
            inc: Vec::new(),
            dirty_out: 0,
            on_stack: false,
            pins: 0,
            epoch: 0,
            mark: 0,
        };
        let id = match self.free_nodes.pop() {
            Some(slot) => {
                self.nodes[slot as usize] = Some(node);
                NodeId(slot)
            }
            None => {
                self.nodes.push(Some(node));
                NodeId(self.nodes.len() as u32 - 1)
            }
        };
        self.index.insert(ptr, id);
        id
    }

    /// Write a reference cell, dirtying its dependents when the value changes.
    pub fn put_ref(&mut self, p: &Pointer, v: V) -> Result<(NodeId, PutOutcome), DcgError> {
        let Some(id) = self.lookup(p) else {
            return Ok((self.alloc_node(p.clone(), Content::Ref(v)), PutOutcome::Created));
        };
        let node = self.node_mut(id);
        let old = match &mut node.content {
            Content::Ref(old) if *old == v => return Ok((id, PutOutcome::Unchanged)),
            Content::Ref(old) => std::mem::replace(old, v),
            other => return Err(DcgError::NameKindClash { pointer: p.clone(), existing: other.kind() }),
        };
        let (dirtied, hit) = self.dirty_from(id);
        if hit.is_some() {
            let current = match &self.node(id).content {
                Content::Ref(v) => format!("{v:?}"),
                _ => unreachable!(),
            };
            return Err(DcgError::AmbiguousName { pointer: p.clone(), previous: format!("{old:?}"), current });
        }
        Ok((id, PutOutcome::Overwritten { dirtied }))
    }

    /// Write a thunk. An equal computation keeps the node and its cache; a
    /// different one clears the cache, drops the old dependencies and dirties
    /// every path into the node.
    pub fn put_thunk(&mut self, p: &Pointer, c: C) -> Result<(NodeId, PutOutcome), DcgError> {
        let Some(id) = self.lookup(p) else {
            return Ok((self.alloc_node(p.clone(), Content::Thunk { comp: c, cache: None }), PutOutcome::Created));
        };
        let node = self.node(id);
        match &node.content {
            Content::Thunk { comp, .. } if *comp == c => return Ok((id, PutOutcome::Reused)),
            Content::Thunk { comp, .. } => {
                if node.on_stack {
                    return Err(DcgError::AmbiguousName {
                        pointer: p.clone(),
                        previous: format!("{comp:?}"),
                        current: format!("{c:?}"),
                    });
                }
            }
            other => return Err(DcgError::NameKindClash { pointer: p.clone(), existing: other.kind() }),
        }
        let old = match &mut self.node_mut(id).content {
            Content::Thunk { comp, cache } => {
                *cache = None;
                std::mem::replace(comp, c)
            }
            _ => unreachable!(),
        };
        self.delete_edges_out(id);
        let (dirtied, hit) = self.dirty_from(id);
        if hit.is_some() {
            let current = match &self.node(id).content {
                Content::Thunk { comp, .. } => format!("{comp:?}"),
                _ => unreachable!(),
            };
            return Err(DcgError::AmbiguousName { pointer: p.clone(), previous: format!("{old:?}"), current });
        }
        Ok((id, PutOutcome::Overwritten { dirtied }))
    }

    /// Write a reference cell without any dirtying.
    pub fn put_ref_untracked(&mut self, p: &Pointer, v: V) -> Result<NodeId, DcgError> {
        match self.lookup(p) {
            None => Ok(self.alloc_node(p.clone(), Content::Ref(v))),
            Some(id) => match &mut self.node_mut(id).content {
                Content::Ref(old) => {
                    *old = v;
                    Ok(id)
                }
                other => Err(DcgError::NameKindClash { pointer: p.clone(), existing: other.kind() }),
            },
        }
    }

    /// Write a thunk without any dirtying; the cache is cleared.
    pub fn put_thunk_untracked(&mut self, p: &Pointer, c: C) -> Result<NodeId, DcgError> {
        match self.lookup(p) {
            None => Ok(self.alloc_node(p.clone(), Content::Thunk { comp: c, cache: None })),
            Some(id) => match &mut self.node_mut(id).content {
                Content::Thunk { comp, cache } => {
                    *comp = c;
                    *cache = None;
                    Ok(id)
                }
                other => Err(DcgError::NameKindClash { pointer: p.clone(), existing: other.kind() }),
            },
        }
    }

    /// Add an edge. An edge from the root replaces any earlier root edge into
    /// the same target, so repeated outer-layer demand does not pile up edges.
    pub fn add_edge(&mut self, source: NodeId, action: Action<V, C, T>, status: Status, target: NodeId) -> EdgeId {
        if source == NodeId::ROOT {
            let old = self
                .node(target)
                .inc
                .iter()
                .copied()
                .find(|&e| self.edge(e).source == NodeId::ROOT);
            if let Some(old) = old {
                self.remove_edge(old);
            }
        }
        let out_pos = self.node(source).out.len() as u32;
        let in_pos = self.node(target).inc.len() as u32;
        let edge = Edge { source, target, action, status, out_pos, in_pos };
        let id = match self.free_edges.pop() {
            Some(slot) => {
                self.edges[slot as usize] = Some(edge);
                EdgeId(slot)
            }
            None => {
                self.edges.push(Some(edge));
                EdgeId(self.edges.len() as u32 - 1)
            }
        };
        self.live_edges += 1;
        let src = self.node_mut(source);
        src.out.push(id);
        if status == Status::Dirty {
            src.dirty_out += 1;
        }
        self.node_mut(target).inc.push(id);
        id
    }

    fn unlink_incoming(&mut self, e: EdgeId) {
        let (target, in_pos) = {
            let edge = self.edge(e);
            (edge.target, edge.in_pos as usize)
        };
        let inc = &mut self.node_mut(target).inc;
        inc.swap_remove(in_pos);
        if let Some(&moved) = inc.get(in_pos) {
            self.edge_mut(moved).in_pos = in_pos as u32;
        }
    }

    fn free_edge(&mut self, e: EdgeId) {
        self.edges[e.0 as usize] = None;
        self.free_edges.push(e.0);
        self.live_edges -= 1;
    }

    /// Remove one edge; the source's edge order is not preserved.
    fn remove_edge(&mut self, e: EdgeId) {
        self.unlink_incoming(e);
        let (source, out_pos, dirty) = {
            let edge = self.edge(e);
            (edge.source, edge.out_pos as usize, edge.status == Status::Dirty)
        };
        let src = self.node_mut(source);
        src.out.swap_remove(out_pos);
        if dirty {
            src.dirty_out -= 1;
        }
        if let Some(&moved) = self.node(source).out.get(out_pos) {
            self.edge_mut(moved).out_pos = out_pos as u32;
        }
        self.free_edge(e);
    }

    /// Drop every outgoing edge of `id`, releasing the targets' counts.
    pub fn delete_edges_out(&mut self, id: NodeId) {
        let out = std::mem::take(&mut self.node_mut(id).out);
        for &e in &out {
            self.unlink_incoming(e);
            self.free_edge(e);
        }
        let node = self.node_mut(id);
        node.dirty_out = 0;
        node.epoch = node.epoch.wrapping_add(1);
        // Keep the allocation for the next run of this node.
        let mut out = out;
        out.clear();
        node.out = out;
    }

    /// Mark every edge on a path into `id` dirty. Returns the number of edges
    /// that changed and the first on-stack node whose edge was dirtied.
    fn dirty_from(&mut self, id: NodeId) -> (u64, Option<NodeId>) {
        self.generation = self.generation.wrapping_add(1);
        let generation = self.generation;
        let mut count = 0;
        let mut hit = None;
        let mut work = vec![id];
        self.node_mut(id).mark = generation;
        while let Some(n) = work.pop() {
            let mut i = 0;
            while i < self.node(n).inc.len() {
                let e = self.node(n).inc[i];
                i += 1;
                let edge = self.edge_mut(e);
                if edge.status == Status::Dirty {
                    continue;
                }
                edge.status = Status::Dirty;
                let source = edge.source;
                count += 1;
                let src = self.node_mut(source);
                src.dirty_out += 1;
                if src.on_stack && hit.is_none() {
                    hit = Some(source);
                }
                if src.mark != generation {
                    src.mark = generation;
                    work.push(source);
                }
            }
        }
        (count, hit)
    }

    /// Mark every edge on a path into `id` dirty; returns how many changed.
    pub fn dirty_paths_to(&mut self, id: NodeId) -> Result<u64, DcgError> {
        let (count, hit) = self.dirty_from(id);
        match hit {
            None => Ok(count),
            Some(n) => Err(DcgError::AmbiguousName {
                pointer: self.pointer(n).clone(),
                previous: "on the force stack".into(),
                current: format!("dirtied through {}", self.pointer(id)),
            }),
        }
    }

    #[inline]
    pub fn all_clean_out(&self, id: NodeId) -> bool {
        self.node(id).dirty_out == 0
    }

    pub fn consistent_action(&self, a: &Action<V, C, T>, id: NodeId) -> bool {
        match (a, &self.node(id).content) {
            (Action::AllocRef(v) | Action::ObsRef(v), Content::Ref(w)) => v == w,
            (Action::AllocThunk(c), Content::Thunk { comp, .. }) => c == comp,
            (Action::ObsThunk(t), Content::Thunk { cache: Some(u), .. }) => t == u,
            _ => false,
        }
    }

    /// Clean a dirty edge if its target is up to date and agrees with it.
    pub fn scrub_edge(&mut self, e: EdgeId) -> Scrub {
        let edge = self.edge(e);
        if edge.status == Status::Clean {
            return Scrub::Cleaned;
        }
        let target = edge.target;
        if !self.all_clean_out(target) || !self.consistent_action(&edge.action, target) {
            return Scrub::Rejected;
        }
        let source = edge.source;
        self.edge_mut(e).status = Status::Clean;
        self.node_mut(source).dirty_out -= 1;
        self.scrubs += 1;
        Scrub::Cleaned
    }

    pub fn push_force(&mut self, id: NodeId) {
        self.node_mut(id).on_stack = true;
        self.stack.push(id);
    }

    pub fn pop_force(&mut self) -> Option<NodeId> {
        let id = self.stack.pop()?;
        self.node_mut(id).on_stack = false;
        Some(id)
    }

    pub fn is_on_stack(&self, id: NodeId) -> bool {
        self.node(id).on_stack
    }

    pub fn stack_top(&self) -> Option<NodeId> {
        self.stack.last().copied()
    }

    pub fn stack_depth(&self) -> usize {
        self.stack.len()
    }

    /// The node whose dependencies new edges are recorded for.
    pub fn context(&self) -> NodeId {
        self.stack_top().unwrap_or(NodeId::ROOT)
    }

    pub fn note_execution(&mut self) {
        self.executions += 1;
    }

    pub fn executions(&self) -> u64 {
        self.executions
    }

    /// Dirty edges cleaned by [`Graph::scrub_edge`] so far.
    pub fn scrubs(&self) -> u64 {
        self.scrubs
    }

    /// Incoming edges plus outer pins.
    pub fn refcount(&self, id: NodeId) -> usize {
        let n = self.node(id);
        n.inc.len() + n.pins as usize
    }

    /// Pin a node for the outer layer.
    pub fn incref(&mut self, id: NodeId) {
        self.node_mut(id).pins += 1;
    }

    /// Release an outer pin.
    pub fn decref(&mut self, id: NodeId) {
        let n = self.node_mut(id);
        assert!(n.pins > 0, "decref without a matching incref");
        n.pins -= 1;
    }

    fn collectable(&self, id: NodeId) -> bool {
        id != NodeId::ROOT && self.refcount(id) == 0 && !self.node(id).on_stack
    }

    /// Remove unreferenced nodes, transitively. Returns how many went.
    pub fn flush(&mut self) -> usize {
        let mut work: Vec<NodeId> = self.node_ids().filter(|&id| self.collectable(id)).collect();
        let mut removed = 0;
        while let Some(id) = work.pop() {
            if !self.is_live(id) || !self.collectable(id) {
                continue;
            }
            let targets: Vec<NodeId> = self.node(id).out.iter().map(|&e| self.edge(e).target).collect();
            self.delete_edges_out(id);
            let node = self.nodes[id.index()].take().expect("live node");
            self.index.remove(&node.ptr);
            self.free_nodes.push(id.0);
            removed += 1;
            work.extend(targets.into_iter().filter(|&t| self.is_live(t) && self.collectable(t)));
        }
        removed
    }

    pub fn stats(&self) -> GraphStats {
        let dirty_edges = self.edges.iter().flatten().filter(|e| e.status == Status::Dirty).count();
        GraphStats { nodes: self.node_count(), edges: self.live_edges, dirty_edges, executions: self.executions }
    }

    /// Every violated well-formedness rule, empty for a healthy graph.
    pub fn check_well_formed(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_structure(&mut out);
        for (i, slot) in self.nodes.iter().enumerate() {
            let Some(node) = slot else { continue };
            if node.dirty_out > 0 {
                for &e in &node.inc {
                    if self.edge(e).status == Status::Clean {
                        out.push(Violation {
                            rule: "transitive-dirtiness",
                            detail: format!(
                                "{} has a dirty outgoing edge but a clean edge from {}",
                                node.ptr,
                                self.pointer(self.edge(e).source)
                            ),
                        });
                    }
                }
            }
            for &e in &node.out {
                let edge = self.edge(e);
                if edge.status != Status::Clean {
                    continue;
                }
                if !self.all_clean_out(edge.target) {
                    out.push(Violation {
                        rule: "clean-edge",
                        detail: format!(
                            "clean edge {} -> {} reaches a node with dirty edges",
                            node.ptr,
                            self.pointer(edge.target)
                        ),
                    });
                } else if !self.consistent_action(&edge.action, edge.target) {
                    out.push(Violation {
                        rule: "clean-edge",
                        detail: format!(
                            "clean edge {} -> {} records {:?} but the node holds {:?}",
                            node.ptr,
                            self.pointer(edge.target),
                            edge.action,
                            self.node(edge.target).content
                        ),
                    });
                }
            }
            let _ = i;
        }
        out
    }

    /// [`Self::check_well_formed`] plus re-evaluation of every clean cached
    /// thunk through `reeval`, which answers whether the cache still holds.
    pub fn check_well_formed_deep(&self, reeval: &mut dyn FnMut(&Pointer, &C, &T) -> bool) -> Vec<Violation> {
        let mut out = self.check_well_formed();
        for id in self.node_ids() {
            let node = self.node(id);
            if let Content::Thunk { comp, cache: Some(t) } = &node.content {
                if node.dirty_out == 0 && !reeval(&node.ptr, comp, t) {
                    out.push(Violation { rule: "thunk-cache", detail: format!("cache of {} is stale", node.ptr) });
                }
            }
        }
        out
    }

    fn check_structure(&self, out: &mut Vec<Violation>) {
        let mut bad = |detail: String| out.push(Violation { rule: "structure", detail });
        for (slot, id) in &self.index {
            match self.nodes.get(id.index()).and_then(Option::as_ref) {
                Some(n) if n.ptr == *slot => {}
                _ => bad(format!("index entry {slot} does not resolve")),
            }
        }
        let mut live_edges = 0;
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            live_edges += 1;
            let id = EdgeId(i as u32);
            if !self.is_live(e.source) || !self.is_live(e.target) {
                bad(format!("edge {i} has a missing endpoint"));
                continue;
            }
            if self.node(e.source).out.get(e.out_pos as usize) != Some(&id) {
                bad(format!("edge {i} is not listed at its source"));
            }
            if self.node(e.target).inc.get(e.in_pos as usize) != Some(&id) {
                bad(format!("edge {i} is not listed at its target"));
            }
            let target_kind = self.node(e.target).content.kind();
            let expect = if e.action.targets_thunk() { "thunk" } else { "ref" };
            if target_kind != expect {
                bad(format!("edge {i} action {} targets a {target_kind}", e.action.label()));
            }
            if !matches!(self.node(e.source).content, Content::Thunk { .. } | Content::Root) {
                bad(format!("edge {i} leaves a reference cell"));
            }
        }
        if live_edges != self.live_edges {
            bad(format!("edge count {} but {} live", self.live_edges, live_edges));
        }
        for (i, slot) in self.nodes.iter().enumerate() {
            let Some(n) = slot else { continue };
            let dirty = n.out.iter().filter(|&&e| self.edge(e).status == Status::Dirty).count();
            if dirty != n.dirty_out as usize {
                bad(format!("{} counts {} dirty edges, has {dirty}", n.ptr, n.dirty_out));
            }
            let listed = self.stack.contains(&NodeId(i as u32));
            if listed != n.on_stack {
                bad(format!("{} stack flag disagrees with the stack", n.ptr));
            }
        }
    }

    /// Deterministic Graphviz rendering.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph dcg {\n");
        for (i, slot) in self.nodes.iter().enumerate() {
            let Some(n) = slot else { continue };
            let shape = match n.content {
                Content::Root => "doublecircle",
                Content::Ref(_) => "box",
                Content::Thunk { .. } => "ellipse",
            };
            let _ = writeln!(s, "  n{i} [label=\"{} {}\", shape={shape}];", n.ptr, n.content.kind());
        }
        for slot in self.nodes.iter().flatten() {
            for &e in &slot.out {
                let e = self.edge(e);
                let style = match e.status {
                    Status::Clean => "solid",
                    Status::Dirty => "dashed, color=red",
                };
                let _ = writeln!(
                    s,
                    "  n{} -> n{} [label=\"{}\", style={style}];",
                    e.source.0,
                    e.target.0,
                    e.action.label()
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Something that can run a thunk node's computation and cache the result.
pub trait Executor<V: Payload, C: Payload, T: Payload> {
    type Error: From<DcgError>;

    fn graph(&mut self) -> &mut Graph<V, C, T>;

    /// Delete the node's outgoing edges, run it on the force stack and store
    /// its result as the cache.
    fn execute(&mut self, id: NodeId) -> Result<(), Self::Error>;
}

/// Bring a thunk up to date. Dirty dependencies are visited depth-first in
/// creation order; each is repaired and then scrubbed, and the first one that
/// cannot be scrubbed makes the node run again. Returns whether the node
/// itself ran.
pub fn refresh<V: Payload, C: Payload, T: Payload, X: Executor<V, C, T>>(x: &mut X, id: NodeId) -> Result<bool, X::Error> {
    let g = x.graph();
    if g.is_on_stack(id) {
        return Err(DcgError::Cycle(g.pointer(id).clone()).into());
    }
    if g.cache(id).is_none() {
        x.execute(id)?;
        return Ok(true);
    }
    if g.all_clean_out(id) {
        return Ok(false);
    }
    let epoch = g.epoch(id);
    let mut i = 0;
    loop {
        let g = x.graph();
        if g.epoch(id) != epoch || g.cache(id).is_none() {
            x.execute(id)?;
            return Ok(true);
        }
        let Some(&e) = g.out_edges(id).get(i) else { break };
        i += 1;
        let edge = g.edge(e);
        if edge.status == Status::Clean {
            continue;
        }
        let target = edge.target;
        let repair_target = match &edge.action {
            Action::AllocThunk(_) => {
                if !g.consistent_action(&edge.action, target) {
                    x.execute(id)?;
                    return Ok(true);
                }
                g.cache(target).is_some()
            }
            Action::ObsThunk(_) => true,
            Action::AllocRef(_) | Action::ObsRef(_) => false,
        };
        if repair_target {
            refresh(x, target)?;
        }
        let g = x.graph();
        if g.epoch(id) != epoch {
            continue;
        }
        if g.scrub_edge(e) == Scrub::Rejected {
            x.execute(id)?;
            return Ok(true);
        }
    }
    if !x.graph().all_clean_out(id) {
        x.execute(id)?;
        return Ok(true);
    }
    Ok(false)
}
