//! Incremental interpretation on the engine.
//!
//! Every evaluation of a command is a thunk named from the command's label
//! and the current loop counts, and every environment or store update is a
//! trie extension named the same way. The environment and store are tries,
//! so a state is identified by the names of its trie nodes, not by the
//! values bound in it.

use std::collections::BTreeMap;
use std::sync::Arc;

use nominal_collections::trie::{trie_ops, TrieOps};
use nominal_collections::Trie;
use nominal_core::engine::EngineError;
use nominal_core::{Counters, Engine, MemoFn, Mode, Name};

use crate::ast::{counted, AExp, BExp, Cmd, CmdKind, Var};

/// Trie depth for environments and stores.
pub const STATE_TRIE_DEPTH: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, thiserror::Error)]
pub enum RuntimeError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("`{0}` does not hold an array")]
    NotAnArray(Var),
    #[error("index {index} out of bounds for `{array}` of length {len}")]
    OutOfBounds { array: Var, index: i64, len: i64 },
    #[error("negative array length {0}")]
    NegativeLength(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ImpError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Variable bindings and array cells after a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Final {
    pub env: BTreeMap<Var, i64>,
    pub store: BTreeMap<i64, i64>,
}

impl Final {
    /// Contents of array `a`, if `a` holds one.
    pub fn array(&self, a: &str) -> Option<Vec<i64>> {
        let base = *self.env.get(a)?;
        let len = *self.store.get(&base)?;
        (0..len).map(|i| self.store.get(&(base + 1 + i)).copied()).collect()
    }
}

type Env = Trie<Var, i64>;
type Store = Trie<i64, i64>;

/// Interpreter state threaded through evaluation. `next` is the first free
/// store address.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    env: Env,
    store: Store,
    next: i64,
}

type Outcome = Result<State, RuntimeError>;

/// `(loop counts, innermost first; state; command; running a loop iteration)`
type EvalArg = (Vec<u64>, State, Arc<Cmd>, bool);

#[derive(Clone)]
struct Ops {
    env: TrieOps<Var, i64>,
    store: TrieOps<i64, i64>,
}

/// Name for `label` under the loop counts.
fn at_counts(label: &Name, counts: &[u64]) -> Name {
    counts.iter().fold(label.clone(), |n, &c| counted(&n, c))
}

fn thunk_name(label: &Name, counts: &[u64]) -> Name {
    at_counts(label, counts).first()
}

fn env_name(label: &Name, counts: &[u64]) -> Name {
    at_counts(label, counts).second().first()
}

fn store_name(label: &Name, counts: &[u64], cell: u64) -> Name {
    counted(&at_counts(label, counts).second().second(), cell)
}

type Res<T> = Result<Result<T, RuntimeError>, EngineError>;

fn lookup(eng: &mut Engine, ops: &Ops, env: &Env, x: &Var) -> Res<i64> {
    Ok(ops.env.find(eng, env, x)?.ok_or_else(|| RuntimeError::Unbound(x.clone())))
}

fn aeval(eng: &mut Engine, ops: &Ops, env: &Env, e: &AExp) -> Res<i64> {
    macro_rules! sub {
        ($e:expr) => {
            match aeval(eng, ops, env, $e)? {
                Ok(v) => v,
                Err(err) => return Ok(Err(err)),
            }
        };
    }
    Ok(Ok(match e {
        AExp::Lit(n) => *n,
        AExp::Var(x) => return lookup(eng, ops, env, x),
        AExp::Add(a, b) => sub!(a).wrapping_add(sub!(b)),
        AExp::Sub(a, b) => sub!(a).wrapping_sub(sub!(b)),
        AExp::Mul(a, b) => sub!(a).wrapping_mul(sub!(b)),
        AExp::Div(a, b) => {
            let (a, b) = (sub!(a), sub!(b));
            if b == 0 {
                return Ok(Err(RuntimeError::DivisionByZero));
            }
            a.wrapping_div(b)
        }
    }))
}

fn beval(eng: &mut Engine, ops: &Ops, env: &Env, b: &BExp) -> Res<bool> {
    Ok(Ok(match b {
        BExp::Const(b) => *b,
        BExp::Cmp(op, x, y) => {
            let x = match aeval(eng, ops, env, x)? {
                Ok(v) => v,
                Err(e) => return Ok(Err(e)),
            };
            let y = match aeval(eng, ops, env, y)? {
                Ok(v) => v,
                Err(e) => return Ok(Err(e)),
            };
            op.holds(x, y)
        }
        BExp::And(x, y) => match beval(eng, ops, env, x)? {
            Ok(true) => return beval(eng, ops, env, y),
            other => return Ok(other),
        },
        BExp::Or(x, y) => match beval(eng, ops, env, x)? {
            Ok(false) => return beval(eng, ops, env, y),
            other => return Ok(other),
        },
        BExp::Not(x) => return Ok(beval(eng, ops, env, x)?.map(|b| !b)),
    }))
}

/// Base address and length of the array bound to `a`.
fn array(eng: &mut Engine, ops: &Ops, st: &State, a: &Var) -> Res<(i64, i64)> {
    let base = match lookup(eng, ops, &st.env, a)? {
        Ok(b) => b,
        Err(e) => return Ok(Err(e)),
    };
    Ok(match ops.store.find(eng, &st.store, &base)? {
        Some(len) => Ok((base, len)),
        None => Err(RuntimeError::NotAnArray(a.clone())),
    })
}

fn index(a: &Var, len: i64, i: i64) -> Result<i64, RuntimeError> {
    if (0..len).contains(&i) {
        Ok(i)
    } else {
        Err(RuntimeError::OutOfBounds { array: a.clone(), index: i, len })
    }
}

fn step(eng: &mut Engine, m: &MemoFn<EvalArg, Outcome>, ops: &Ops, (counts, st, cmd, iterating): EvalArg) -> Result<Outcome, EngineError> {
    macro_rules! ok {
        ($e:expr) => {
            match $e? {
                Ok(v) => v,
                Err(err) => return Ok(Err(err)),
            }
        };
    }
    let call = |eng: &mut Engine, counts: Vec<u64>, st: State, c: &Arc<Cmd>, iterating: bool| -> Result<Outcome, EngineError> {
        let t = eng.thunk(m, thunk_name(&c.label, &counts), (counts, st, c.clone(), iterating))?;
        eng.force(&t)
    };
    let label = &cmd.label;
    Ok(Ok(match &cmd.kind {
        CmdKind::Skip => st,
        CmdKind::Seq(a, b) => {
            let st = ok!(call(eng, counts.clone(), st, a, false));
            return call(eng, counts, st, b, false);
        }
        CmdKind::If(g, a, b) => {
            let branch = if ok!(beval(eng, ops, &st.env, g)) { a } else { b };
            return call(eng, counts, st, branch, false);
        }
        CmdKind::While(g, body) if iterating => {
            if !ok!(beval(eng, ops, &st.env, g)) {
                return Ok(Ok(st));
            }
            let st = ok!(call(eng, counts.clone(), st, body, false));
            let mut next = counts;
            next[0] += 1;
            return call(eng, next, st, &cmd, true);
        }
        CmdKind::While(..) => {
            let mut inner = Vec::with_capacity(counts.len() + 1);
            inner.push(0);
            inner.extend_from_slice(&counts);
            return call(eng, inner, st, &cmd, true);
        }
        CmdKind::Assign(x, e) => {
            let v = ok!(aeval(eng, ops, &st.env, e));
            let env = ops.env.extend(eng, env_name(label, &counts), &st.env, x.clone(), v)?;
            State { env, ..st }
        }
        CmdKind::ArrAlloc(a, e) => {
            let len = ok!(aeval(eng, ops, &st.env, e));
            if len < 0 {
                return Ok(Err(RuntimeError::NegativeLength(len)));
            }
            let base = st.next;
            let mut store = ops.store.extend(eng, store_name(label, &counts, 0), &st.store, base, len)?;
            for i in 1..=len {
                store = ops.store.extend(eng, store_name(label, &counts, i as u64), &store, base + i, 0)?;
            }
            let env = ops.env.extend(eng, env_name(label, &counts), &st.env, a.clone(), base)?;
            State { env, store, next: base + len + 1 }
        }
        CmdKind::ArrRead(x, a, e) => {
            let (base, len) = ok!(array(eng, ops, &st, a));
            let i = ok!(Ok::<_, EngineError>(aeval(eng, ops, &st.env, e)?.and_then(|i| index(a, len, i))));
            let v = ops.store.find(eng, &st.store, &(base + 1 + i))?.expect("array cells are allocated with the array");
            let env = ops.env.extend(eng, env_name(label, &counts), &st.env, x.clone(), v)?;
            State { env, ..st }
        }
        CmdKind::ArrWrite(a, ie, e) => {
            let (base, len) = ok!(array(eng, ops, &st, a));
            let i = ok!(Ok::<_, EngineError>(aeval(eng, ops, &st.env, ie)?.and_then(|i| index(a, len, i))));
            let v = ok!(aeval(eng, ops, &st.env, e));
            let store = ops.store.extend(eng, store_name(label, &counts, 0), &st.store, base + 1 + i, v)?;
            State { store, ..st }
        }
    }))
}

/// Counts from one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Command evaluations executed (not answered from the memo table).
    pub eval_runs: u64,
    /// Engine counters over the run.
    pub engine: Counters,
}

/// An interpreter session: one engine, reused across edits.
pub struct Interp {
    eng: Engine,
    ops: Ops,
    eval: MemoFn<EvalArg, Outcome>,
    top: Name,
}

impl Interp {
    pub fn new(mode: Mode) -> Result<Interp, EngineError> {
        let mut eng = Engine::new(mode);
        let seed = Name::root().second();
        let (s_env, s_store, s_eval, top) = seed.fork4();
        let ops = Ops {
            env: trie_ops(&mut eng, &s_env, "imp-env", STATE_TRIE_DEPTH)?,
            store: trie_ops(&mut eng, &s_store, "imp-store", STATE_TRIE_DEPTH)?,
        };
        let body_ops = ops.clone();
        let eval = eng.mk_mfn(s_eval, "imp/eval", move |eng, m, arg: EvalArg| step(eng, m, &body_ops, arg))?;
        Ok(Interp { eng, ops, eval, top })
    }

    pub fn engine(&self) -> &Engine {
        &self.eng
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.eng
    }

    /// Evaluate `program` from the empty state. Later runs of edited
    /// programs reuse whatever the earlier runs built.
    pub fn run(&mut self, program: &Cmd) -> Result<(Final, RunStats), ImpError> {
        let before = (self.eng.reexec_of(&self.eval), self.eng.counters());
        let st = State { env: Trie::Nil, store: Trie::Nil, next: 0 };
        let t = self.eng.thunk(&self.eval, self.top.clone(), (Vec::new(), st, Arc::new(program.clone()), false))?;
        let out = self.eng.force(&t)?;
        let stats = RunStats { eval_runs: self.eng.reexec_of(&self.eval) - before.0, engine: self.eng.counters() - before.1 };
        let st = out?;
        let env = self.ops.env.entries(&self.eng, &st.env)?.into_iter().collect();
        let store = self.ops.store.entries(&self.eng, &st.store)?.into_iter().collect();
        Ok((Final { env, store }, stats))
    }
}
