//! Nominal incremental computation: names, the demanded computation graph and
//! a memoizing engine built on top of them.

pub mod dcg;
pub mod engine;
pub mod names;

pub use dcg::{DcgError, Graph, GraphStats, NodeId, PutOutcome, Violation};
pub use engine::{ARef, AThunk, Counters, Data, Engine, EngineError, MemoFn, Mode, Val};
pub use names::{fork, fork4, fresh_name, name_of_content, Name, Namespace, Pointer};

/// Stack reserved by [`with_big_stack`]. Demand and repair recurse once per
/// dependency level, so long lists need deep stacks.
pub const BIG_STACK_BYTES: usize = 2 << 30;

/// Run `f` on a scoped thread with a [`BIG_STACK_BYTES`] stack.
pub fn with_big_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    with_stack_size(BIG_STACK_BYTES, f)
}

/// Run `f` on a scoped thread with the given stack size, re-raising panics.
pub fn with_stack_size<R: Send>(bytes: usize, f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        let handle = std::thread::Builder::new()
            .stack_size(bytes)
            .spawn_scoped(s, f)
            .expect("spawn worker thread");
        handle.join().unwrap_or_else(|p| std::panic::resume_unwind(p))
    })
}
