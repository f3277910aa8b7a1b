//! Reader for the s-expression surface syntax printed by the `Display`
//! impls in [`crate::syntax`].
//!
//! ```text
//! value  ::= x | (pair v v) | (inj1 v) | (inj2 v) | (nm 1 2 ..)
//!          | (ref NAME NS) | (thk NAME NS) | NS
//! NS     ::= (nsv NAME ..)                      namespace nested from the top
//! comp   ::= f | (ret v) | (lam x e) | (app e v) | (fix f e) | (let x e e)
//!          | (case v (x e) (x e)) | (split v (x x) e) | (thunk v e)
//!          | (force v) | (fork v) | (ref v v) | (get v)
//!          | (ns v (x e)) | (nest v e (x e))
//! ```
//!
//! `;` starts a comment that runs to the end of the line.

use nominal_core::names::Side;
use nominal_core::{Name, Namespace, Pointer};

use crate::syntax::{ident, Computation, Ident, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
enum Sx {
    Atom(usize, String),
    List(usize, Vec<Sx>),
}

impl Sx {
    fn offset(&self) -> usize {
        match self {
            Sx::Atom(o, _) | Sx::List(o, _) => *o,
        }
    }
}

fn err<T>(at: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { offset: at, message: message.into() })
}

fn read_all(src: &str) -> Result<Vec<Sx>, ParseError> {
    let bytes = src.as_bytes();
    let mut stack: Vec<(usize, Vec<Sx>)> = vec![(0, Vec::new())];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((i, Vec::new()));
                i += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return err(i, "unbalanced `)`");
                }
                let (start, items) = stack.pop().expect("open list");
                stack.last_mut().expect("outer list").1.push(Sx::List(start, items));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'(' | b')' | b';') {
                    i += 1;
                }
                stack.last_mut().expect("list").1.push(Sx::Atom(start, src[start..i].to_string()));
            }
        }
    }
    if stack.len() > 1 {
        return err(stack.last().expect("open list").0, "unclosed `(`");
    }
    Ok(stack.pop().expect("top").1)
}

fn read_one(src: &str) -> Result<Sx, ParseError> {
    let mut items = read_all(src)?;
    match items.len() {
        1 => Ok(items.pop().expect("one item")),
        0 => err(0, "empty input"),
        _ => err(items[1].offset(), "trailing input after the term"),
    }
}

/// Parse one computation.
pub fn parse_computation(src: &str) -> Result<Computation, ParseError> {
    comp(&read_one(src)?)
}

/// Parse one value.
pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    value(&read_one(src)?)
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn var(sx: &Sx) -> Result<Ident, ParseError> {
    match sx {
        Sx::Atom(_, s) if is_ident(s) => Ok(ident(s)),
        _ => err(sx.offset(), "expected an identifier"),
    }
}

fn head(sx: &Sx) -> Option<(&str, &[Sx])> {
    match sx {
        Sx::List(_, items) => match items.split_first() {
            Some((Sx::Atom(_, h), rest)) => Some((h.as_str(), rest)),
            _ => None,
        },
        Sx::Atom(..) => None,
    }
}

fn arity(sx: &Sx, args: &[Sx], n: usize) -> Result<(), ParseError> {
    if args.len() == n {
        Ok(())
    } else {
        err(sx.offset(), format!("expected {n} arguments, found {}", args.len()))
    }
}

fn name(sx: &Sx) -> Result<Name, ParseError> {
    match head(sx) {
        Some(("nm", steps)) => {
            let mut n = Name::root();
            for s in steps {
                n = match s {
                    Sx::Atom(_, a) if a == "1" => n.path([Side::First]),
                    Sx::Atom(_, a) if a == "2" => n.path([Side::Second]),
                    _ => return err(s.offset(), "name steps are 1 or 2"),
                };
            }
            Ok(n)
        }
        _ => err(sx.offset(), "expected a name `(nm ..)`"),
    }
}

fn namespace(sx: &Sx) -> Result<Namespace, ParseError> {
    match head(sx) {
        Some(("nsv", seeds)) => seeds.iter().try_fold(Namespace::top(), |ns, s| Ok(ns.nest(&name(s)?))),
        _ => err(sx.offset(), "expected a namespace `(nsv ..)`"),
    }
}

fn pointer(sx: &Sx, args: &[Sx]) -> Result<Pointer, ParseError> {
    match args {
        [Sx::Atom(_, r)] if r == "root" => Ok(Pointer::Root),
        [n, ns] => Ok(Pointer::at(name(n)?, namespace(ns)?)),
        _ => err(sx.offset(), "expected a name and a namespace"),
    }
}

fn value(sx: &Sx) -> Result<Value, ParseError> {
    if let Sx::Atom(..) = sx {
        return Ok(Value::Var(var(sx)?));
    }
    let Some((h, args)) = head(sx) else { return err(sx.offset(), "expected a value") };
    match h {
        "pair" => {
            arity(sx, args, 2)?;
            Ok(Value::pair(value(&args[0])?, value(&args[1])?))
        }
        "inj1" | "inj2" => {
            arity(sx, args, 1)?;
            Ok(Value::inj(if h == "inj1" { 1 } else { 2 }, value(&args[0])?))
        }
        "nm" => Ok(Value::Name(name(sx)?)),
        "nsv" => Ok(Value::Ns(namespace(sx)?)),
        "ref" => Ok(Value::Ref(pointer(sx, args)?)),
        "thk" => Ok(Value::Thk(pointer(sx, args)?)),
        _ => err(sx.offset(), format!("unknown value form `{h}`")),
    }
}

/// `(x e)` binder clause.
fn clause(sx: &Sx) -> Result<(Ident, Computation), ParseError> {
    match sx {
        Sx::List(_, items) if items.len() == 2 => Ok((var(&items[0])?, comp(&items[1])?)),
        _ => err(sx.offset(), "expected a clause `(x e)`"),
    }
}

fn comp(sx: &Sx) -> Result<Computation, ParseError> {
    use std::sync::Arc;
    use Computation as C;
    if let Sx::Atom(..) = sx {
        return Ok(C::FixVar(var(sx)?));
    }
    let Some((h, args)) = head(sx) else { return err(sx.offset(), "expected a computation") };
    let out = match h {
        "ret" => {
            arity(sx, args, 1)?;
            C::ret(value(&args[0])?)
        }
        "lam" => {
            arity(sx, args, 2)?;
            C::Term(crate::syntax::Terminal::Lam(var(&args[0])?, Arc::new(comp(&args[1])?)))
        }
        "app" => {
            arity(sx, args, 2)?;
            C::App(Arc::new(comp(&args[0])?), value(&args[1])?)
        }
        "fix" => {
            arity(sx, args, 2)?;
            C::Fix(var(&args[0])?, Arc::new(comp(&args[1])?))
        }
        "let" => {
            arity(sx, args, 3)?;
            C::Let(var(&args[0])?, Arc::new(comp(&args[1])?), Arc::new(comp(&args[2])?))
        }
        "case" => {
            arity(sx, args, 3)?;
            let (x1, e1) = clause(&args[1])?;
            let (x2, e2) = clause(&args[2])?;
            C::Case(value(&args[0])?, x1, Arc::new(e1), x2, Arc::new(e2))
        }
        "split" => {
            arity(sx, args, 3)?;
            let (x1, x2) = match &args[1] {
                Sx::List(_, xs) if xs.len() == 2 => (var(&xs[0])?, var(&xs[1])?),
                other => return err(other.offset(), "expected `(x1 x2)`"),
            };
            C::Split(value(&args[0])?, x1, x2, Arc::new(comp(&args[2])?))
        }
        "thunk" => {
            arity(sx, args, 2)?;
            C::Thunk(value(&args[0])?, Arc::new(comp(&args[1])?))
        }
        "force" | "fork" | "get" => {
            arity(sx, args, 1)?;
            let v = value(&args[0])?;
            match h {
                "force" => C::Force(v),
                "fork" => C::Fork(v),
                _ => C::Get(v),
            }
        }
        "ref" => {
            arity(sx, args, 2)?;
            C::Ref(value(&args[0])?, value(&args[1])?)
        }
        "ns" => {
            arity(sx, args, 2)?;
            let (x, e) = clause(&args[1])?;
            C::Ns(value(&args[0])?, x, Arc::new(e))
        }
        "nest" => {
            arity(sx, args, 3)?;
            let (x, e2) = clause(&args[2])?;
            C::Nest(value(&args[0])?, Arc::new(comp(&args[1])?), x, Arc::new(e2))
        }
        _ => return err(sx.offset(), format!("unknown computation form `{h}`")),
    };
    Ok(out)
}
