//! Nominal incremental data structures: named lists with memoized
//! transforms, probabilistically balanced trees with folds and mergesort,
//! and tries extended under external names.

pub mod list;
pub mod tree;
pub mod trie;

pub use list::{LazyList, List};
pub use tree::Tree;
pub use trie::Trie;

use nominal_core::EngineError;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CollectionError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("index {index} is out of range for a list of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}
