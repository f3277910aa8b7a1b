//! Program edits that keep the labels of untouched commands.
//!
//! Statement paths are dotted, 1-based indices into blocks. A segment after
//! a `while` indexes its body; a segment after an `if` picks the branch
//! (`1` then, `2` else) and the following segment indexes into it.
//!
//! | spec            | edit                                                        |
//! |-----------------|-------------------------------------------------------------|
//! | `repl@3.1=42`   | first literal of statement 3.1 becomes 42                   |
//! | `swap@2`        | statements 2 and 3 of the top block trade places            |
//! | `ext@loop1=+500`| first literal in the guard of the first loop grows by 500   |
//! | `ext@2=+10`     | first literal of statement 2, a loop or an assignment, grows |

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::ast::{AExp, BExp, Cmd, CmdKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StmtPath {
    Path(Vec<usize>),
    /// The `n`th loop in pre-order, counting from 1.
    Loop(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Edit {
    ReplaceLiteral { at: StmtPath, value: i64 },
    SwapStmts { at: StmtPath },
    ExtendLoopBound { at: StmtPath, delta: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EditError {
    #[error("no statement at {0}")]
    BadPath(String),
    #[error("statement at {0} has no integer literal")]
    NoLiteral(String),
    #[error("statement at {0} is neither a loop nor an assignment")]
    NotABound(String),
    #[error("statement at {0} has no successor to swap with")]
    NoSuccessor(String),
    #[error("cannot read edit `{0}`")]
    Syntax(String),
}

impl fmt::Display for StmtPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StmtPath::Loop(n) => write!(f, "loop{n}"),
            StmtPath::Path(p) => {
                let parts: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                f.write_str(&parts.join("."))
            }
        }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::ReplaceLiteral { at, value } => write!(f, "repl@{at}={value}"),
            Edit::SwapStmts { at } => write!(f, "swap@{at}"),
            Edit::ExtendLoopBound { at, delta } => write!(f, "ext@{at}={delta:+}"),
        }
    }
}

impl FromStr for StmtPath {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self, EditError> {
        let bad = || EditError::Syntax(s.to_owned());
        if let Some(n) = s.strip_prefix("loop") {
            return n.parse().ok().filter(|&n| n > 0).map(StmtPath::Loop).ok_or_else(bad);
        }
        let parts: Result<Vec<usize>, _> = s.split('.').map(str::parse).collect();
        match parts {
            Ok(p) if p.iter().all(|&i| i > 0) => Ok(StmtPath::Path(p)),
            _ => Err(bad()),
        }
    }
}

impl FromStr for Edit {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self, EditError> {
        let bad = || EditError::Syntax(s.to_owned());
        let (kind, rest) = s.split_once('@').ok_or_else(bad)?;
        let (at, arg) = match rest.split_once('=') {
            Some((a, v)) => (a.parse()?, Some(v)),
            None => (rest.parse()?, None),
        };
        match (kind, arg) {
            ("repl", Some(v)) => Ok(Edit::ReplaceLiteral { at, value: v.parse().map_err(|_| bad())? }),
            ("swap", None) => Ok(Edit::SwapStmts { at }),
            ("ext", Some(v)) => Ok(Edit::ExtendLoopBound { at, delta: v.trim_start_matches('+').parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }
}

/// Paths of all loops in pre-order.
pub fn loop_paths(program: &Cmd) -> Vec<Vec<usize>> {
    fn walk(block: &Cmd, prefix: &[usize], out: &mut Vec<Vec<usize>>) {
        for (i, s) in block.statements().into_iter().enumerate() {
            let mut here = prefix.to_vec();
            here.push(i + 1);
            match &s.kind {
                CmdKind::While(_, body) => {
                    out.push(here.clone());
                    walk(body, &here, out);
                }
                CmdKind::If(_, a, b) => {
                    for (j, branch) in [a, b].into_iter().enumerate() {
                        let mut p = here.clone();
                        p.push(j + 1);
                        walk(branch, &p, out);
                    }
                }
                _ => {}
            }
        }
    }
    let mut out = Vec::new();
    walk(program, &[], &mut out);
    out
}

fn resolve(program: &Cmd, at: &StmtPath) -> Result<Vec<usize>, EditError> {
    match at {
        StmtPath::Path(p) => Ok(p.clone()),
        StmtPath::Loop(n) => loop_paths(program).into_iter().nth(n - 1).ok_or_else(|| EditError::BadPath(at.to_string())),
    }
}

type BlockFn<'a> = &'a mut dyn FnMut(&Cmd) -> Result<Cmd, EditError>;

fn bad() -> EditError {
    EditError::BadPath(String::new())
}

/// Rewrite the block that `path` leads to. Each segment picks a statement
/// of the current block; a loop continues into its body, an `if` takes the
/// next segment as its branch selector.
fn map_block(block: &Cmd, path: &[usize], g: BlockFn<'_>) -> Result<Cmd, EditError> {
    let Some((&first, rest)) = path.split_first() else { return g(block) };
    map_stmt(block, first, &mut |stmt| match &stmt.kind {
        CmdKind::While(guard, body) => {
            let body = map_block(body, rest, g)?;
            Ok(Cmd::new(stmt.label.clone(), CmdKind::While(guard.clone(), Arc::new(body))))
        }
        CmdKind::If(guard, a, b) => {
            let (&sel, rest) = rest.split_first().ok_or_else(bad)?;
            let (a, b) = match sel {
                1 => (Arc::new(map_block(a, rest, g)?), b.clone()),
                2 => (a.clone(), Arc::new(map_block(b, rest, g)?)),
                _ => return Err(bad()),
            };
            Ok(Cmd::new(stmt.label.clone(), CmdKind::If(guard.clone(), a, b)))
        }
        _ => Err(bad()),
    })
}

/// Replace the `one_based`th statement of a block with `f` of it.
fn map_stmt(block: &Cmd, one_based: usize, f: BlockFn<'_>) -> Result<Cmd, EditError> {
    if one_based == 0 || one_based > block.statements().len() {
        return Err(bad());
    }
    fn go(block: &Cmd, idx: usize, f: BlockFn<'_>) -> Result<Cmd, EditError> {
        match (&block.kind, idx) {
            (CmdKind::Seq(a, rest), 0) => Ok(Cmd::new(block.label.clone(), CmdKind::Seq(Arc::new(f(a)?), rest.clone()))),
            (CmdKind::Seq(a, rest), _) => Ok(Cmd::new(block.label.clone(), CmdKind::Seq(a.clone(), Arc::new(go(rest, idx - 1, f)?)))),
            (_, 0) => f(block),
            _ => Err(bad()),
        }
    }
    go(block, one_based - 1, f)
}

/// Swap the `one_based`th statement of a block with its successor, keeping
/// every label.
fn swap_in_block(block: &Cmd, one_based: usize) -> Result<Cmd, EditError> {
    let n = block.statements().len();
    if one_based == 0 || one_based > n {
        return Err(bad());
    }
    if one_based == n {
        return Err(EditError::NoSuccessor(String::new()));
    }
    fn go(block: &Cmd, idx: usize) -> Cmd {
        let CmdKind::Seq(a, rest) = &block.kind else { unreachable!("index checked against the block length") };
        if idx > 0 {
            return Cmd::new(block.label.clone(), CmdKind::Seq(a.clone(), Arc::new(go(rest, idx - 1))));
        }
        let kind = match &rest.kind {
            CmdKind::Seq(b, tail) => CmdKind::Seq(b.clone(), Arc::new(Cmd::new(rest.label.clone(), CmdKind::Seq(a.clone(), tail.clone())))),
            _ => CmdKind::Seq(rest.clone(), a.clone()),
        };
        Cmd::new(block.label.clone(), kind)
    }
    Ok(go(block, one_based - 1))
}

fn first_literal_a(e: &mut AExp, f: &mut dyn FnMut(&mut i64)) -> bool {
    match e {
        AExp::Lit(n) => {
            f(n);
            true
        }
        AExp::Var(_) => false,
        AExp::Add(a, b) | AExp::Sub(a, b) | AExp::Mul(a, b) | AExp::Div(a, b) => first_literal_a(a, f) || first_literal_a(b, f),
    }
}

fn first_literal_b(e: &mut BExp, f: &mut dyn FnMut(&mut i64)) -> bool {
    match e {
        BExp::Const(_) => false,
        BExp::Cmp(_, a, b) => first_literal_a(a, f) || first_literal_a(b, f),
        BExp::And(a, b) | BExp::Or(a, b) => first_literal_b(a, f) || first_literal_b(b, f),
        BExp::Not(a) => first_literal_b(a, f),
    }
}

/// Change the first literal of a statement's own expressions.
fn with_first_literal(stmt: &Cmd, f: &mut dyn FnMut(&mut i64)) -> Option<Cmd> {
    let mut kind = stmt.kind.clone();
    let hit = match &mut kind {
        CmdKind::Assign(_, e) | CmdKind::ArrAlloc(_, e) | CmdKind::ArrRead(_, _, e) => first_literal_a(e, f),
        CmdKind::ArrWrite(_, i, e) => first_literal_a(i, f) || first_literal_a(e, f),
        CmdKind::If(g, _, _) | CmdKind::While(g, _) => first_literal_b(g, f),
        CmdKind::Skip | CmdKind::Seq(..) => false,
    };
    hit.then(|| Cmd::new(stmt.label.clone(), kind))
}

/// Apply an edit. Untouched commands keep their labels.
pub fn edit_program(program: &Cmd, edit: &Edit) -> Result<Cmd, EditError> {
    let at = match edit {
        Edit::ReplaceLiteral { at, .. } | Edit::SwapStmts { at } | Edit::ExtendLoopBound { at, .. } => at,
    };
    let shown = at.to_string();
    let path = resolve(program, at)?;
    let (&last, parents) = path.split_last().ok_or_else(|| EditError::BadPath(shown.clone()))?;
    let result = match edit {
        Edit::ReplaceLiteral { value, .. } => map_block(program, parents, &mut |blk| {
            map_stmt(blk, last, &mut |s| with_first_literal(s, &mut |n| *n = *value).ok_or(EditError::NoLiteral(String::new())))
        }),
        Edit::ExtendLoopBound { delta, .. } => map_block(program, parents, &mut |blk| {
            map_stmt(blk, last, &mut |s| {
                if !matches!(s.kind, CmdKind::While(..) | CmdKind::Assign(..)) {
                    return Err(EditError::NotABound(String::new()));
                }
                with_first_literal(s, &mut |n| *n = n.wrapping_add(*delta)).ok_or(EditError::NoLiteral(String::new()))
            })
        }),
        Edit::SwapStmts { .. } => map_block(program, parents, &mut |blk| swap_in_block(blk, last)),
    };
    result.map_err(|e| match e {
        EditError::BadPath(_) => EditError::BadPath(shown.clone()),
        EditError::NoLiteral(_) => EditError::NoLiteral(shown.clone()),
        EditError::NotABound(_) => EditError::NotABound(shown.clone()),
        EditError::NoSuccessor(_) => EditError::NoSuccessor(shown.clone()),
        other => other,
    })
}
