//! The core calculus of nominal incremental computation: syntax, a reference
//! evaluator over plain stores, an incremental evaluator over demanded
//! computation graphs, restriction of graphs to stores, a program generator
//! and a differential consistency checker.

pub mod check;
pub mod eval;
pub mod gen;
pub mod parse;
pub mod syntax;

pub use check::{check_consistency, check_program, CheckConfig, Failure, FailureKind, Report};
pub use eval::{
    domain, embedding_gap, eval_inc, eval_ref, restrict, store_of_refs, CalcError, CalcGraph, Incremental, PlainStore, PointerSet, Reference, Rule,
    RuleHits, StoreEntry,
};
pub use gen::{gen_case, gen_program, Case, Edit, Input, Ty};
pub use parse::{parse_computation, parse_value, ParseError};
pub use syntax::{Computation, Ident, Terminal, Value};
