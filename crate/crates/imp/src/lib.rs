//! An interpreter for a small imperative language with arrays, running on
//! the nominal incremental engine, together with a direct interpreter used
//! as an oracle, program edits, and benchmark programs.
//!
//! Evaluation recurses once per loop iteration; run long loops under
//! [`nominal_core::with_big_stack`].

pub mod ast;
pub mod edit;
pub mod eval;
pub mod oracle;
pub mod parse;
pub mod programs;

pub use ast::{AExp, BExp, Cmd, CmdKind, CmpOp, Var};
pub use edit::{edit_program, Edit, EditError, StmtPath};
pub use eval::{Final, ImpError, Interp, RunStats, RuntimeError};
pub use oracle::interpret;
pub use parse::{parse, ParseError};
pub use programs::EditKind;
