//! Commands and expressions. Every command carries a position label, a name
//! fixed at parse time that stays with the node through program edits.

use std::fmt;
use std::sync::Arc;

use nominal_core::names::Side;
use nominal_core::Name;

pub type Var = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum AExp {
    Lit(i64),
    Var(Var),
    Add(Box<AExp>, Box<AExp>),
    Sub(Box<AExp>, Box<AExp>),
    Mul(Box<AExp>, Box<AExp>),
    Div(Box<AExp>, Box<AExp>),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BExp {
    Const(bool),
    Cmp(CmpOp, AExp, AExp),
    And(Box<BExp>, Box<BExp>),
    Or(Box<BExp>, Box<BExp>),
    Not(Box<BExp>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cmd {
    pub label: Name,
    pub kind: CmdKind,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum CmdKind {
    Skip,
    Seq(Arc<Cmd>, Arc<Cmd>),
    If(BExp, Arc<Cmd>, Arc<Cmd>),
    While(BExp, Arc<Cmd>),
    /// `x := e`
    Assign(Var, AExp),
    /// `a := array(e)`: `e` zeroed cells.
    ArrAlloc(Var, AExp),
    /// `x := a[e]`
    ArrRead(Var, Var, AExp),
    /// `a[e1] := e2`
    ArrWrite(Var, AExp, AExp),
}

/// Extend `base` by a prefix-free encoding of `n`: each binary digit, most
/// significant first, as two steps, then one closing step.
pub fn counted(base: &Name, n: u64) -> Name {
    let bits = 64 - n.leading_zeros();
    let mut steps = Vec::with_capacity(2 * bits as usize + 1);
    for i in (0..bits).rev() {
        steps.push(Side::First);
        steps.push(if n >> i & 1 == 1 { Side::First } else { Side::Second });
    }
    steps.push(Side::Second);
    base.path(steps)
}

/// Label of the `i`th command in a pre-order walk.
pub fn position_label(i: u64) -> Name {
    counted(&Name::root(), i)
}

impl Cmd {
    pub fn new(label: Name, kind: CmdKind) -> Cmd {
        Cmd { label, kind }
    }

    /// Direct subcommands.
    pub fn children(&self) -> Vec<&Arc<Cmd>> {
        match &self.kind {
            CmdKind::Seq(a, b) | CmdKind::If(_, a, b) => vec![a, b],
            CmdKind::While(_, body) => vec![body],
            _ => Vec::new(),
        }
    }

    /// Every label in pre-order.
    pub fn labels(&self) -> Vec<Name> {
        let mut out = vec![self.label.clone()];
        for c in self.children() {
            out.extend(c.labels());
        }
        out
    }

    /// The statements of a block: a right-nested `Seq` chain, flattened.
    pub fn statements(&self) -> Vec<&Cmd> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match &cur.kind {
                CmdKind::Seq(a, b) => {
                    out.push(&**a);
                    cur = b;
                }
                _ => {
                    out.push(cur);
                    break;
                }
            }
        }
        out
    }
}

impl fmt::Display for AExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AExp::Lit(n) if *n < 0 => write!(f, "({n})"),
            AExp::Lit(n) => write!(f, "{n}"),
            AExp::Var(x) => write!(f, "{x}"),
            AExp::Add(a, b) => write!(f, "({a} + {b})"),
            AExp::Sub(a, b) => write!(f, "({a} - {b})"),
            AExp::Mul(a, b) => write!(f, "({a} * {b})"),
            AExp::Div(a, b) => write!(f, "({a} / {b})"),
        }
    }
}

impl fmt::Display for BExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExp::Const(b) => write!(f, "{b}"),
            BExp::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            BExp::And(a, b) => write!(f, "({a} && {b})"),
            BExp::Or(a, b) => write!(f, "({a} || {b})"),
            BExp::Not(a) => write!(f, "!({a})"),
        }
    }
}

impl Cmd {
    fn write_block(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        if let CmdKind::Seq(..) = self.kind {
            for s in self.statements() {
                s.write_stmt(f, indent)?;
            }
            Ok(())
        } else {
            self.write_stmt(f, indent)
        }
    }

    fn write_stmt(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = "    ".repeat(indent);
        match &self.kind {
            CmdKind::Skip => writeln!(f, "{pad}skip;"),
            CmdKind::Seq(..) => {
                writeln!(f, "{pad}{{")?;
                self.write_block(f, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
            CmdKind::Assign(x, e) => writeln!(f, "{pad}{x} := {e};"),
            CmdKind::ArrAlloc(a, e) => writeln!(f, "{pad}{a} := array({e});"),
            CmdKind::ArrRead(x, a, e) => writeln!(f, "{pad}{x} := {a}[{e}];"),
            CmdKind::ArrWrite(a, i, e) => writeln!(f, "{pad}{a}[{i}] := {e};"),
            CmdKind::If(b, c1, c2) => {
                writeln!(f, "{pad}if ({b}) {{")?;
                c1.write_block(f, indent + 1)?;
                writeln!(f, "{pad}}} else {{")?;
                c2.write_block(f, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
            CmdKind::While(b, body) => {
                writeln!(f, "{pad}while ({b}) {{")?;
                body.write_block(f, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
    }
}

/// Prints concrete syntax that parses back to the same tree.
impl fmt::Display for Cmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_block(f, 0)
    }
}
