//! Terms of the calculus: values, terminal computations and computations,
//! with capture-free substitution and an s-expression printer.
//!
//! Evaluation substitutes closed values eagerly, so substitution never has to
//! rename binders; it only has to stop at binders that shadow the variable.

use std::fmt;
use std::sync::Arc;

use nominal_core::names::{NameView, Side};
use nominal_core::{Name, Namespace, Pointer};

/// Variable identifiers, shared between substituted copies.
pub type Ident = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    Var(Ident),
    Pair(Arc<Value>, Arc<Value>),
    /// Injection into a sum; the index is 1 or 2.
    Inj(u8, Arc<Value>),
    Name(Name),
    Ref(Pointer),
    Thk(Pointer),
    Ns(Namespace),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Terminal {
    Lam(Ident, Arc<Computation>),
    Ret(Value),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Computation {
    Term(Terminal),
    App(Arc<Computation>, Value),
    FixVar(Ident),
    Fix(Ident, Arc<Computation>),
    Let(Ident, Arc<Computation>, Arc<Computation>),
    Case(Value, Ident, Arc<Computation>, Ident, Arc<Computation>),
    Split(Value, Ident, Ident, Arc<Computation>),
    Thunk(Value, Arc<Computation>),
    Force(Value),
    Fork(Value),
    Ref(Value, Value),
    Get(Value),
    Ns(Value, Ident, Arc<Computation>),
    Nest(Value, Arc<Computation>, Ident, Arc<Computation>),
}

pub fn ident(s: &str) -> Ident {
    Arc::from(s)
}

impl Value {
    pub fn var(x: &str) -> Value {
        Value::Var(ident(x))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn inj(i: u8, v: Value) -> Value {
        assert!(i == 1 || i == 2, "injection index must be 1 or 2");
        Value::Inj(i, Arc::new(v))
    }

    /// Replace free occurrences of `x` by `v`.
    pub fn subst(&self, x: &str, v: &Value) -> Value {
        match self {
            Value::Var(y) if &**y == x => v.clone(),
            Value::Pair(a, b) => Value::Pair(Arc::new(a.subst(x, v)), Arc::new(b.subst(x, v))),
            Value::Inj(i, w) => Value::Inj(*i, Arc::new(w.subst(x, v))),
            _ => self.clone(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Value::Var(_) => false,
            Value::Pair(a, b) => a.is_closed() && b.is_closed(),
            Value::Inj(_, w) => w.is_closed(),
            _ => true,
        }
    }

    fn mentions(&self, x: &str) -> bool {
        match self {
            Value::Var(y) => &**y == x,
            Value::Pair(a, b) => a.mentions(x) || b.mentions(x),
            Value::Inj(_, w) => w.mentions(x),
            _ => false,
        }
    }
}

fn rc(e: Computation) -> Arc<Computation> {
    Arc::new(e)
}

impl Computation {
    pub fn ret(v: Value) -> Computation {
        Computation::Term(Terminal::Ret(v))
    }

    pub fn lam(x: &str, e: Computation) -> Computation {
        Computation::Term(Terminal::Lam(ident(x), rc(e)))
    }

    pub fn app(e: Computation, v: Value) -> Computation {
        Computation::App(rc(e), v)
    }

    pub fn fix(f: &str, e: Computation) -> Computation {
        Computation::Fix(ident(f), rc(e))
    }

    pub fn let_(x: &str, e1: Computation, e2: Computation) -> Computation {
        Computation::Let(ident(x), rc(e1), rc(e2))
    }

    pub fn case(v: Value, x1: &str, e1: Computation, x2: &str, e2: Computation) -> Computation {
        Computation::Case(v, ident(x1), rc(e1), ident(x2), rc(e2))
    }

    pub fn split(v: Value, x1: &str, x2: &str, e: Computation) -> Computation {
        Computation::Split(v, ident(x1), ident(x2), rc(e))
    }

    pub fn thunk(name: Value, e: Computation) -> Computation {
        Computation::Thunk(name, rc(e))
    }

    pub fn ns(name: Value, x: &str, e: Computation) -> Computation {
        Computation::Ns(name, ident(x), rc(e))
    }

    pub fn nest(ns: Value, e1: Computation, x: &str, e2: Computation) -> Computation {
        Computation::Nest(ns, rc(e1), ident(x), rc(e2))
    }

    /// Replace free occurrences of the value variable `x` by `v`.
    pub fn subst(&self, x: &str, v: &Value) -> Computation {
        use Computation as C;
        let sub = |e: &Arc<Computation>| rc(e.subst(x, v));
        let under = |b: &Ident, e: &Arc<Computation>| if &**b == x { e.clone() } else { sub(e) };
        match self {
            C::Term(Terminal::Ret(w)) => C::Term(Terminal::Ret(w.subst(x, v))),
            C::Term(Terminal::Lam(y, e)) => C::Term(Terminal::Lam(y.clone(), under(y, e))),
            C::App(e, w) => C::App(sub(e), w.subst(x, v)),
            C::FixVar(_) => self.clone(),
            C::Fix(f, e) => C::Fix(f.clone(), sub(e)),
            C::Let(y, e1, e2) => C::Let(y.clone(), sub(e1), under(y, e2)),
            C::Case(w, y1, e1, y2, e2) => C::Case(w.subst(x, v), y1.clone(), under(y1, e1), y2.clone(), under(y2, e2)),
            C::Split(w, y1, y2, e) => {
                let body = if &**y1 == x || &**y2 == x { e.clone() } else { sub(e) };
                C::Split(w.subst(x, v), y1.clone(), y2.clone(), body)
            }
            C::Thunk(w, e) => C::Thunk(w.subst(x, v), sub(e)),
            C::Force(w) => C::Force(w.subst(x, v)),
            C::Fork(w) => C::Fork(w.subst(x, v)),
            C::Ref(w1, w2) => C::Ref(w1.subst(x, v), w2.subst(x, v)),
            C::Get(w) => C::Get(w.subst(x, v)),
            C::Ns(w, y, e) => C::Ns(w.subst(x, v), y.clone(), under(y, e)),
            C::Nest(w, e1, y, e2) => C::Nest(w.subst(x, v), sub(e1), y.clone(), under(y, e2)),
        }
    }

    /// Replace free occurrences of the fixed-point variable `f` by `c`.
    pub fn subst_fix(&self, f: &str, c: &Computation) -> Computation {
        use Computation as C;
        let sub = |e: &Arc<Computation>| rc(e.subst_fix(f, c));
        match self {
            C::FixVar(g) if &**g == f => c.clone(),
            C::FixVar(_) | C::Term(Terminal::Ret(_)) | C::Force(_) | C::Fork(_) | C::Ref(..) | C::Get(_) => self.clone(),
            C::Term(Terminal::Lam(y, e)) => C::Term(Terminal::Lam(y.clone(), sub(e))),
            C::App(e, w) => C::App(sub(e), w.clone()),
            C::Fix(g, _) if &**g == f => self.clone(),
            C::Fix(g, e) => C::Fix(g.clone(), sub(e)),
            C::Let(y, e1, e2) => C::Let(y.clone(), sub(e1), sub(e2)),
            C::Case(w, y1, e1, y2, e2) => C::Case(w.clone(), y1.clone(), sub(e1), y2.clone(), sub(e2)),
            C::Split(w, y1, y2, e) => C::Split(w.clone(), y1.clone(), y2.clone(), sub(e)),
            C::Thunk(w, e) => C::Thunk(w.clone(), sub(e)),
            C::Ns(w, y, e) => C::Ns(w.clone(), y.clone(), sub(e)),
            C::Nest(w, e1, y, e2) => C::Nest(w.clone(), sub(e1), y.clone(), sub(e2)),
        }
    }

    /// Whether `x` occurs free as a value variable.
    pub fn mentions(&self, x: &str) -> bool {
        use Computation as C;
        let bound = |b: &Ident| &**b == x;
        match self {
            C::Term(Terminal::Ret(w)) | C::Force(w) | C::Fork(w) | C::Get(w) => w.mentions(x),
            C::Term(Terminal::Lam(y, e)) => !bound(y) && e.mentions(x),
            C::App(e, w) => e.mentions(x) || w.mentions(x),
            C::FixVar(_) => false,
            C::Fix(_, e) => e.mentions(x),
            C::Let(y, e1, e2) => e1.mentions(x) || (!bound(y) && e2.mentions(x)),
            C::Case(w, y1, e1, y2, e2) => w.mentions(x) || (!bound(y1) && e1.mentions(x)) || (!bound(y2) && e2.mentions(x)),
            C::Split(w, y1, y2, e) => w.mentions(x) || (!bound(y1) && !bound(y2) && e.mentions(x)),
            C::Thunk(w, e) => w.mentions(x) || e.mentions(x),
            C::Ref(w1, w2) => w1.mentions(x) || w2.mentions(x),
            C::Ns(w, y, e) => w.mentions(x) || (!bound(y) && e.mentions(x)),
            C::Nest(w, e1, y, e2) => w.mentions(x) || e1.mentions(x) || (!bound(y) && e2.mentions(x)),
        }
    }

    /// Number of syntax nodes, values excluded.
    pub fn size(&self) -> usize {
        use Computation as C;
        1 + match self {
            C::Term(Terminal::Lam(_, e)) | C::App(e, _) | C::Fix(_, e) | C::Split(.., e) | C::Thunk(_, e) | C::Ns(_, _, e) => e.size(),
            C::Let(_, e1, e2) | C::Case(_, _, e1, _, e2) | C::Nest(_, e1, _, e2) => e1.size() + e2.size(),
            _ => 0,
        }
    }
}

/// Fork steps from `•` down to `n`, or `None` when `n` is not below `•`.
pub fn root_path(n: &Name) -> Option<Vec<Side>> {
    let mut steps = Vec::new();
    let mut cur = n;
    loop {
        match cur.view() {
            NameView::Root => break,
            NameView::Fork1 { tail, .. } => {
                steps.push(Side::First);
                cur = tail;
            }
            NameView::Fork2 { tail, .. } => {
                steps.push(Side::Second);
                cur = tail;
            }
            NameView::Fresh { .. } | NameView::Content(_) => return None,
        }
    }
    steps.reverse();
    Some(steps)
}

struct NameSx<'a>(&'a Name);

impl fmt::Display for NameSx<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match root_path(self.0) {
            Some(steps) => {
                f.write_str("(nm")?;
                for s in steps {
                    f.write_str(if s == Side::First { " 1" } else { " 2" })?;
                }
                f.write_str(")")
            }
            None => write!(f, "(nm-opaque \"{}\")", self.0),
        }
    }
}

struct NsSx<'a>(&'a Namespace);

impl fmt::Display for NsSx<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seeds = Vec::new();
        let mut cur = self.0;
        while let Some((parent, seed)) = cur.nested_parts() {
            seeds.push(seed);
            cur = parent;
        }
        f.write_str("(nsv")?;
        for s in seeds.iter().rev() {
            write!(f, " {}", NameSx(s))?;
        }
        f.write_str(")")
    }
}

fn write_pointer(f: &mut fmt::Formatter<'_>, head: &str, p: &Pointer) -> fmt::Result {
    match p {
        Pointer::At(n, ns) => write!(f, "({head} {} {})", NameSx(n), NsSx(ns)),
        Pointer::Root => write!(f, "({head} root)"),
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => f.write_str(x),
            Value::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Value::Inj(i, v) => write!(f, "(inj{i} {v})"),
            Value::Name(n) => write!(f, "{}", NameSx(n)),
            Value::Ref(p) => write_pointer(f, "ref", p),
            Value::Thk(p) => write_pointer(f, "thk", p),
            Value::Ns(ns) => write!(f, "{}", NsSx(ns)),
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Ret(v) => write!(f, "(ret {v})"),
            Terminal::Lam(x, e) => write!(f, "(lam {x} {e})"),
        }
    }
}

impl fmt::Display for Computation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Computation as C;
        match self {
            C::Term(t) => write!(f, "{t}"),
            C::App(e, v) => write!(f, "(app {e} {v})"),
            C::FixVar(x) => f.write_str(x),
            C::Fix(x, e) => write!(f, "(fix {x} {e})"),
            C::Let(x, e1, e2) => write!(f, "(let {x} {e1} {e2})"),
            C::Case(v, x1, e1, x2, e2) => write!(f, "(case {v} ({x1} {e1}) ({x2} {e2}))"),
            C::Split(v, x1, x2, e) => write!(f, "(split {v} ({x1} {x2}) {e})"),
            C::Thunk(v, e) => write!(f, "(thunk {v} {e})"),
            C::Force(v) => write!(f, "(force {v})"),
            C::Fork(v) => write!(f, "(fork {v})"),
            C::Ref(v1, v2) => write!(f, "(ref {v1} {v2})"),
            C::Get(v) => write!(f, "(get {v})"),
            C::Ns(v, x, e) => write!(f, "(ns {v} ({x} {e}))"),
            C::Nest(v, e1, x, e2) => write!(f, "(nest {v} {e1} ({x} {e2}))"),
        }
    }
}
