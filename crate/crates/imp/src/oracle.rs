//! Direct interpretation with ordinary maps, for checking the incremental
//! interpreter.

use std::collections::BTreeMap;

use crate::ast::{AExp, BExp, Cmd, CmdKind, Var};
use crate::eval::{Final, RuntimeError};

struct Machine {
    env: BTreeMap<Var, i64>,
    store: BTreeMap<i64, i64>,
    next: i64,
}

impl Machine {
    fn var(&self, x: &Var) -> Result<i64, RuntimeError> {
        self.env.get(x).copied().ok_or_else(|| RuntimeError::Unbound(x.clone()))
    }

    fn aexp(&self, e: &AExp) -> Result<i64, RuntimeError> {
        Ok(match e {
            AExp::Lit(n) => *n,
            AExp::Var(x) => self.var(x)?,
            AExp::Add(a, b) => self.aexp(a)?.wrapping_add(self.aexp(b)?),
            AExp::Sub(a, b) => self.aexp(a)?.wrapping_sub(self.aexp(b)?),
            AExp::Mul(a, b) => self.aexp(a)?.wrapping_mul(self.aexp(b)?),
            AExp::Div(a, b) => {
                let (a, b) = (self.aexp(a)?, self.aexp(b)?);
                if b == 0 {
                    return Err(RuntimeError::DivisionByZero);
                }
                a.wrapping_div(b)
            }
        })
    }

    fn bexp(&self, b: &BExp) -> Result<bool, RuntimeError> {
        Ok(match b {
            BExp::Const(b) => *b,
            BExp::Cmp(op, x, y) => op.holds(self.aexp(x)?, self.aexp(y)?),
            BExp::And(x, y) => self.bexp(x)? && self.bexp(y)?,
            BExp::Or(x, y) => self.bexp(x)? || self.bexp(y)?,
            BExp::Not(x) => !self.bexp(x)?,
        })
    }

    fn cell(&self, a: &Var, i: &AExp) -> Result<i64, RuntimeError> {
        let base = self.var(a)?;
        let len = *self.store.get(&base).ok_or_else(|| RuntimeError::NotAnArray(a.clone()))?;
        let i = self.aexp(i)?;
        if !(0..len).contains(&i) {
            return Err(RuntimeError::OutOfBounds { array: a.clone(), index: i, len });
        }
        Ok(base + 1 + i)
    }

    fn exec(&mut self, c: &Cmd) -> Result<(), RuntimeError> {
        match &c.kind {
            CmdKind::Skip => {}
            CmdKind::Seq(a, b) => {
                self.exec(a)?;
                self.exec(b)?;
            }
            CmdKind::If(g, a, b) => {
                if self.bexp(g)? {
                    self.exec(a)?
                } else {
                    self.exec(b)?
                }
            }
            CmdKind::While(g, body) => {
                while self.bexp(g)? {
                    self.exec(body)?;
                }
            }
            CmdKind::Assign(x, e) => {
                let v = self.aexp(e)?;
                self.env.insert(x.clone(), v);
            }
            CmdKind::ArrAlloc(a, e) => {
                let len = self.aexp(e)?;
                if len < 0 {
                    return Err(RuntimeError::NegativeLength(len));
                }
                let base = self.next;
                self.store.insert(base, len);
                for i in 1..=len {
                    self.store.insert(base + i, 0);
                }
                self.next = base + len + 1;
                self.env.insert(a.clone(), base);
            }
            CmdKind::ArrRead(x, a, i) => {
                let at = self.cell(a, i)?;
                let v = self.store[&at];
                self.env.insert(x.clone(), v);
            }
            CmdKind::ArrWrite(a, i, e) => {
                let at = self.cell(a, i)?;
                let v = self.aexp(e)?;
                self.store.insert(at, v);
            }
        }
        Ok(())
    }
}

/// Run `program` directly from the empty state.
pub fn interpret(program: &Cmd) -> Result<Final, RuntimeError> {
    let mut m = Machine { env: BTreeMap::new(), store: BTreeMap::new(), next: 0 };
    m.exec(program)?;
    Ok(Final { env: m.env, store: m.store })
}
