//! Random well-typed, terminating, name-disciplined programs.
//!
//! Programs read a handful of input reference cells allocated by the outer
//! layer. Generation is type-directed so evaluation never gets stuck, and
//! names are threaded linearly: every allocation site runs at most once per
//! evaluation, either because it uses its own literal name or because it
//! uses a name forked from a loop's name argument. Thunks are forced at most
//! once. Loops are fixed points over a unary counter, so they always stop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nominal_core::names::Side;
use nominal_core::{Name, Namespace, Pointer};

use crate::eval::{store_of_refs, CalcGraph, PlainStore};
use crate::syntax::{Computation, Value};

/// Types the generator tracks. `Nat` is a unary counter: `inj1 •` is zero
/// and `inj2 n` the successor of `n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Ty {
    Name,
    Nat,
    Sum(Box<Ty>, Box<Ty>),
    Prod(Box<Ty>, Box<Ty>),
    Ref(Box<Ty>),
    Thk(Box<Ty>),
    Ns,
}

impl Ty {
    fn sum(a: Ty, b: Ty) -> Ty {
        Ty::Sum(Box::new(a), Box::new(b))
    }

    fn prod(a: Ty, b: Ty) -> Ty {
        Ty::Prod(Box::new(a), Box::new(b))
    }

    /// First-order data: no pointers or namespaces inside.
    pub fn is_data(&self) -> bool {
        match self {
            Ty::Name | Ty::Nat => true,
            Ty::Sum(a, b) | Ty::Prod(a, b) => a.is_data() && b.is_data(),
            Ty::Ref(_) | Ty::Thk(_) | Ty::Ns => false,
        }
    }
}

/// Largest counter a literal or an input holds.
pub const MAX_NAT: u32 = 4;

pub fn nat(n: u32) -> Value {
    (0..n).fold(Value::inj(1, Value::Name(Name::root())), |v, _| Value::inj(2, v))
}

/// Prefix-free encoding of `i` as fork steps below `base`.
fn indexed(base: Name, mut i: u64) -> Name {
    let mut steps = Vec::new();
    while i > 0 {
        steps.push(Side::First);
        steps.push(if i & 1 == 1 { Side::Second } else { Side::First });
        i >>= 1;
    }
    steps.push(Side::Second);
    base.path(steps)
}

/// Name of the top-level thunk, `•.1`.
pub fn top_name() -> Name {
    Name::root().first()
}

/// Name of the `i`-th input cell, below `•.2.1`.
pub fn input_name(i: u64) -> Name {
    indexed(Name::root().second().first(), i)
}

/// Name of the `i`-th literal allocation site, below `•.2.2`.
pub fn site_name(i: u64) -> Name {
    indexed(Name::root().second().second(), i)
}

/// `let t <- thunk(•.1, body) in force t`.
pub fn wrap_top(body: Computation) -> Computation {
    Computation::let_("top", Computation::thunk(Value::Name(top_name()), body), Computation::Force(Value::var("top")))
}

/// Uniform random value of a data type.
pub fn random_value(rng: &mut impl Rng, ty: &Ty) -> Value {
    match ty {
        Ty::Name => {
            let depth = rng.random_range(0..3);
            let steps: Vec<Side> = (0..depth).map(|_| if rng.random() { Side::First } else { Side::Second }).collect();
            Value::Name(Name::root().path(steps))
        }
        Ty::Nat => nat(rng.random_range(0..=MAX_NAT)),
        Ty::Sum(a, b) => {
            if rng.random() {
                Value::inj(1, random_value(rng, a))
            } else {
                Value::inj(2, random_value(rng, b))
            }
        }
        Ty::Prod(a, b) => Value::pair(random_value(rng, a), random_value(rng, b)),
        Ty::Ref(_) | Ty::Thk(_) | Ty::Ns => panic!("no random literal of type {ty:?}"),
    }
}

fn random_data_ty(rng: &mut impl Rng, depth: u32) -> Ty {
    let pick = if depth == 0 { rng.random_range(0..2) } else { rng.random_range(0..5) };
    match pick {
        0 => Ty::Name,
        1 => Ty::Nat,
        2 => Ty::Nat,
        3 => Ty::sum(random_data_ty(rng, depth - 1), random_data_ty(rng, depth - 1)),
        _ => Ty::prod(random_data_ty(rng, depth - 1), random_data_ty(rng, depth - 1)),
    }
}

/// An input cell of a generated program.
#[derive(Clone, Debug)]
pub struct Input {
    pub pointer: Pointer,
    pub ty: Ty,
    pub value: Value,
}

/// An outer-layer overwrite of an input cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Edit {
    pub target: Pointer,
    pub value: Value,
}

/// A generated program together with its inputs.
#[derive(Clone, Debug)]
pub struct Case {
    pub seed: u64,
    pub body: Computation,
    pub inputs: Vec<Input>,
}

impl Case {
    /// The body wrapped in a named top-level thunk.
    pub fn program(&self) -> Computation {
        wrap_top(self.body.clone())
    }

    pub fn initial_cells(&self) -> Vec<(Pointer, Value)> {
        self.inputs.iter().map(|i| (i.pointer.clone(), i.value.clone())).collect()
    }

    pub fn initial_store(&self) -> PlainStore {
        store_of_refs(self.initial_cells())
    }

    pub fn initial_graph(&self) -> CalcGraph {
        let mut g = CalcGraph::new();
        for (p, v) in self.initial_cells() {
            g.put_ref(&p, v).expect("fresh input cell");
        }
        g
    }

    /// `count` random overwrites of the inputs, reproducible from `seed`.
    pub fn random_edits(&self, seed: u64, count: usize) -> Vec<Edit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ed17);
        (0..count)
            .map(|_| {
                let input = &self.inputs[rng.random_range(0..self.inputs.len())];
                Edit { target: input.pointer.clone(), value: random_value(&mut rng, &input.ty) }
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    /// Freely reusable.
    Shared,
    /// A name reserved for one allocation.
    Supply,
    /// A thunk that may be forced once.
    Linear,
}

#[derive(Clone, Debug)]
struct Entry {
    val: Value,
    ty: Ty,
    kind: Kind,
    used: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    sites: u64,
    vars: u64,
    env: Vec<Entry>,
    /// Inside a loop body: no literal allocation sites, no linear resources.
    in_loop: bool,
}

impl Gen {
    fn var(&mut self, prefix: &str) -> String {
        self.vars += 1;
        format!("{prefix}{}", self.vars)
    }

    fn bind(&mut self, x: &str, ty: Ty, kind: Kind) {
        self.env.push(Entry { val: Value::var(x), ty, kind, used: false });
    }

    fn site(&mut self) -> Value {
        self.sites += 1;
        Value::Name(site_name(self.sites))
    }

    /// A name for one allocation: a forked supply name when one is in scope,
    /// otherwise a new literal site.
    fn alloc_name(&mut self) -> Value {
        let unused = self.env.iter().rposition(|e| e.kind == Kind::Supply && !e.used);
        match unused {
            Some(i) if self.rng.random_bool(0.7) => {
                self.env[i].used = true;
                self.env[i].val.clone()
            }
            _ => self.site(),
        }
    }

    fn shared_of(&self, pred: impl Fn(&Ty) -> bool) -> Vec<usize> {
        (0..self.env.len()).filter(|&i| self.env[i].kind == Kind::Shared && pred(&self.env[i].ty)).collect()
    }

    fn pick(&mut self, xs: &[usize]) -> Option<usize> {
        if xs.is_empty() {
            None
        } else {
            Some(xs[self.rng.random_range(0..xs.len())])
        }
    }

    fn value(&mut self, ty: &Ty) -> Value {
        let candidates = self.shared_of(|t| t == ty);
        if !candidates.is_empty() && self.rng.random_bool(0.6) {
            let i = self.pick(&candidates).expect("non-empty");
            return self.env[i].val.clone();
        }
        match ty {
            Ty::Sum(a, b) => {
                if self.rng.random() {
                    Value::inj(1, self.value(a))
                } else {
                    Value::inj(2, self.value(b))
                }
            }
            Ty::Prod(a, b) => {
                let x = self.value(a);
                Value::pair(x, self.value(b))
            }
            _ => random_value(&mut self.rng, ty),
        }
    }

    fn data_ty(&mut self) -> Ty {
        random_data_ty(&mut self.rng, 2)
    }

    /// Run `f` with the environment restored afterwards, keeping consumption
    /// marks on entries that were already in scope.
    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let len = self.env.len();
        let out = f(self);
        self.env.truncate(len);
        out
    }

    fn split_size(&mut self, size: u32) -> (u32, u32) {
        let avail = size.saturating_sub(1).max(2);
        let a = self.rng.random_range(1..avail);
        (a, avail - a)
    }

    /// A computation returning a value of data type `ty`.
    fn comp(&mut self, ty: &Ty, size: u32) -> Computation {
        if size <= 1 {
            return Computation::ret(self.value(ty));
        }
        for _ in 0..8 {
            if let Some(e) = self.try_form(ty, size) {
                return e;
            }
        }
        Computation::ret(self.value(ty))
    }

    fn try_form(&mut self, ty: &Ty, size: u32) -> Option<Computation> {
        let form = self.rng.random_range(0..13);
        let free = !self.in_loop;
        Some(match form {
            0 => self.gen_let(ty, size),
            1 | 2 => self.gen_get(ty, size)?,
            3 => self.gen_case(ty, size)?,
            4 => self.gen_split(ty, size)?,
            5 => self.gen_app(ty, size),
            6 if free => self.gen_ref(ty, size),
            7 | 8 if free => self.gen_thunk(ty, size),
            9 if free => self.gen_force(ty, size)?,
            10 if free => self.gen_fork(ty, size),
            11 if free => self.gen_ns(ty, size),
            12 if free => self.gen_loop(ty, size),
            _ => return None,
        })
    }

    fn gen_let(&mut self, ty: &Ty, size: u32) -> Computation {
        let (s1, s2) = self.split_size(size);
        let sigma = self.data_ty();
        let e1 = self.comp(&sigma, s1);
        let x = self.var("x");
        let e2 = self.scoped(|g| {
            g.bind(&x, sigma, Kind::Shared);
            g.comp(ty, s2)
        });
        Computation::let_(&x, e1, e2)
    }

    fn gen_get(&mut self, ty: &Ty, size: u32) -> Option<Computation> {
        let refs = self.shared_of(|t| matches!(t, Ty::Ref(_)));
        let i = self.pick(&refs)?;
        let Ty::Ref(sigma) = self.env[i].ty.clone() else { unreachable!() };
        let r = self.env[i].val.clone();
        let x = self.var("x");
        let body = self.scoped(|g| {
            g.bind(&x, *sigma, Kind::Shared);
            g.comp(ty, size - 1)
        });
        Some(Computation::let_(&x, Computation::Get(r), body))
    }

    fn gen_case(&mut self, ty: &Ty, size: u32) -> Option<Computation> {
        let sums = self.shared_of(|t| matches!(t, Ty::Sum(..) | Ty::Nat));
        let i = self.pick(&sums)?;
        let (t1, t2) = match self.env[i].ty.clone() {
            Ty::Sum(a, b) => (*a, *b),
            _ => (Ty::Name, Ty::Nat),
        };
        let v = self.env[i].val.clone();
        let (s1, s2) = self.split_size(size);
        let (x1, x2) = (self.var("l"), self.var("r"));
        let e1 = self.scoped(|g| {
            g.bind(&x1, t1, Kind::Shared);
            g.comp(ty, s1)
        });
        let e2 = self.scoped(|g| {
            g.bind(&x2, t2, Kind::Shared);
            g.comp(ty, s2)
        });
        Some(Computation::case(v, &x1, e1, &x2, e2))
    }

    fn gen_split(&mut self, ty: &Ty, size: u32) -> Option<Computation> {
        let prods = self.shared_of(|t| matches!(t, Ty::Prod(..)));
        let i = self.pick(&prods)?;
        let Ty::Prod(a, b) = self.env[i].ty.clone() else { unreachable!() };
        let v = self.env[i].val.clone();
        let (x1, x2) = (self.var("a"), self.var("b"));
        let body = self.scoped(|g| {
            g.bind(&x1, *a, Kind::Shared);
            g.bind(&x2, *b, Kind::Shared);
            g.comp(ty, size - 1)
        });
        Some(Computation::split(v, &x1, &x2, body))
    }

    fn gen_app(&mut self, ty: &Ty, size: u32) -> Computation {
        let sigma = self.data_ty();
        let arg = self.value(&sigma);
        let x = self.var("y");
        let body = self.scoped(|g| {
            g.bind(&x, sigma, Kind::Shared);
            g.comp(ty, size - 1)
        });
        Computation::app(Computation::lam(&x, body), arg)
    }

    fn gen_ref(&mut self, ty: &Ty, size: u32) -> Computation {
        let sigma = self.data_ty();
        let v = self.value(&sigma);
        let name = self.alloc_name();
        let r = self.var("c");
        let body = self.scoped(|g| {
            g.bind(&r, Ty::Ref(Box::new(sigma)), Kind::Shared);
            g.comp(ty, size - 1)
        });
        Computation::let_(&r, Computation::Ref(name, v), body)
    }

    fn gen_thunk(&mut self, ty: &Ty, size: u32) -> Computation {
        let (s1, s2) = self.split_size(size);
        let sigma = self.data_ty();
        let name = self.alloc_name();
        let suspended = self.comp(&sigma, s1);
        let t = self.var("t");
        let force_now = self.rng.random_bool(0.5);
        let body = self.scoped(|g| {
            if force_now {
                let y = g.var("x");
                let rest = g.scoped(|g| {
                    g.bind(&y, sigma, Kind::Shared);
                    g.comp(ty, s2)
                });
                Computation::let_(&y, Computation::Force(Value::var(&t)), rest)
            } else {
                g.bind(&t, Ty::Thk(Box::new(sigma)), Kind::Linear);
                g.comp(ty, s2)
            }
        });
        Computation::let_(&t, Computation::thunk(name, suspended), body)
    }

    fn gen_force(&mut self, ty: &Ty, size: u32) -> Option<Computation> {
        let ready: Vec<usize> = (0..self.env.len()).filter(|&i| self.env[i].kind == Kind::Linear && !self.env[i].used).collect();
        let i = self.pick(&ready)?;
        self.env[i].used = true;
        let Ty::Thk(sigma) = self.env[i].ty.clone() else { unreachable!() };
        let t = self.env[i].val.clone();
        let x = self.var("x");
        let body = self.scoped(|g| {
            g.bind(&x, *sigma, Kind::Shared);
            g.comp(ty, size - 1)
        });
        Some(Computation::let_(&x, Computation::Force(t), body))
    }

    fn gen_fork(&mut self, ty: &Ty, size: u32) -> Computation {
        let name = self.alloc_name();
        let (p, a, b) = (self.var("p"), self.var("n"), self.var("n"));
        let body = self.scoped(|g| {
            g.bind(&a, Ty::Name, Kind::Supply);
            g.bind(&b, Ty::Name, Kind::Supply);
            g.comp(ty, size - 1)
        });
        Computation::let_(&p, Computation::Fork(name), Computation::split(Value::var(&p), &a, &b, body))
    }

    /// `ns` followed by a `nest` that runs a sub-computation inside it.
    fn gen_ns(&mut self, ty: &Ty, size: u32) -> Computation {
        let name = self.alloc_name();
        let w = self.var("w");
        let body = self.scoped(|g| {
            g.bind(&w, Ty::Ns, Kind::Shared);
            let (s1, s2) = g.split_size(size);
            let sigma = g.data_ty();
            let inner = g.comp(&sigma, s1);
            let x = g.var("x");
            let rest = g.scoped(|g| {
                g.bind(&x, sigma, Kind::Shared);
                g.comp(ty, s2)
            });
            Computation::nest(Value::var(&w), inner, &x, rest)
        });
        Computation::ns(name, &w, body)
    }

    /// A counter-bounded loop. Each round forks the loop's name, recurses on
    /// one half and memoizes its own step in a thunk named by the other.
    fn gen_loop(&mut self, ty: &Ty, size: u32) -> Computation {
        let (s_body, s_rest) = self.split_size(size);
        let counter = self.value(&Ty::Nat);
        let start = self.alloc_name();
        let (f, c, n, z, c2, p, a, b, r, t) =
            (self.var("f"), self.var("k"), self.var("m"), self.var("z"), self.var("k"), self.var("p"), self.var("m"), self.var("m"), self.var("v"), self.var("t"));
        let was_in_loop = std::mem::replace(&mut self.in_loop, true);
        let zero = self.scoped(|g| {
            g.bind(&z, Ty::Name, Kind::Shared);
            g.comp(ty, (s_body / 3).max(1))
        });
        let step = self.scoped(|g| {
            g.bind(&c2, Ty::Nat, Kind::Shared);
            g.bind(&r, ty.clone(), Kind::Shared);
            g.comp(ty, s_body)
        });
        self.in_loop = was_in_loop;
        let recurse = Computation::app(Computation::app(Computation::FixVar(f.as_str().into()), Value::var(&c2)), Value::var(&b));
        let succ = Computation::let_(
            &p,
            Computation::Fork(Value::var(&n)),
            Computation::split(
                Value::var(&p),
                &a,
                &b,
                Computation::let_(
                    &r,
                    recurse,
                    Computation::let_(&t, Computation::thunk(Value::var(&a), step), Computation::Force(Value::var(&t))),
                ),
            ),
        );
        let looped = Computation::fix(&f, Computation::lam(&c, Computation::lam(&n, Computation::case(Value::var(&c), &z, zero, &c2, succ))));
        let x = self.var("x");
        let rest = self.scoped(|g| {
            g.bind(&x, ty.clone(), Kind::Shared);
            g.comp(ty, s_rest)
        });
        Computation::let_(&x, Computation::app(Computation::app(looped, counter), start), rest)
    }
}

/// A program and its inputs, reproducible from `(seed, size)`.
pub fn gen_case(seed: u64, size: u32) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_inputs = rng.random_range(1..=4);
    let inputs: Vec<Input> = (0..n_inputs)
        .map(|i| {
            let ty = random_data_ty(&mut rng, 2);
            let value = random_value(&mut rng, &ty);
            Input { pointer: Pointer::at(input_name(i), Namespace::top()), ty, value }
        })
        .collect();
    let mut g = Gen { rng, sites: 0, vars: 0, env: Vec::new(), in_loop: false };
    for input in &inputs {
        g.env.push(Entry { val: Value::Ref(input.pointer.clone()), ty: Ty::Ref(Box::new(input.ty.clone())), kind: Kind::Shared, used: false });
    }
    let result = g.data_ty();
    let body = g.comp(&result, size.max(1));
    Case { seed, body, inputs }
}

/// The body of [`gen_case`]: a closed computation over the case's inputs.
pub fn gen_program(seed: u64, size: u32) -> Computation {
    gen_case(seed, size).body
}
