//! Workloads and edit scripts.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    EagerMap,
    EagerFilter,
    Min,
    Sum,
    Reverse,
    Median,
    Mergesort,
    LazyMap,
    LazyFilter,
    /// One of the interpreter's benchmark programs.
    Imp(String),
}

impl Program {
    /// Every list program.
    pub const LISTS: [Program; 9] = [
        Program::EagerMap,
        Program::EagerFilter,
        Program::Min,
        Program::Sum,
        Program::Reverse,
        Program::Median,
        Program::Mergesort,
        Program::LazyMap,
        Program::LazyFilter,
    ];

    pub fn is_imp(&self) -> bool {
        matches!(self, Program::Imp(_))
    }

    /// Every program, list and interpreter alike.
    pub fn all() -> Vec<Program> {
        let mut v = Program::LISTS.to_vec();
        v.extend(nominal_imp::programs::PROGRAMS.iter().map(|p| Program::Imp((*p).to_owned())));
        v
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Program::EagerMap => "eager-map",
            Program::EagerFilter => "eager-filter",
            Program::Min => "min",
            Program::Sum => "sum",
            Program::Reverse => "reverse",
            Program::Median => "median",
            Program::Mergesort => "mergesort",
            Program::LazyMap => "lazy-map",
            Program::LazyFilter => "lazy-filter",
            Program::Imp(name) => return write!(f, "imp:{name}"),
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("unknown demand `{0}` (expected all or one)")]
    UnknownDemand(String),
    #[error("unknown edit kind `{0}`")]
    UnknownEdit(String),
    #[error("bad position list `{0}`")]
    BadPositions(String),
    #[error("input size must be at least 1")]
    EmptyInput,
    #[error("edit {index} ({edit}) does not fit a list of length {len}")]
    BadPosition { index: usize, edit: ScriptEdit, len: usize },
    #[error("{program} does not support {kind} edits")]
    Unsupported { program: Program, kind: EditKind },
}

impl FromStr for Program {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, WorkloadError> {
        if let Some(name) = s.strip_prefix("imp:") {
            return if nominal_imp::programs::PROGRAMS.contains(&name) {
                Ok(Program::Imp(name.to_owned()))
            } else {
                Err(WorkloadError::UnknownProgram(s.to_owned()))
            };
        }
        match s {
            "map" => return Ok(Program::EagerMap),
            "filter" => return Ok(Program::EagerFilter),
            _ => {}
        }
        Program::LISTS.into_iter().find(|p| p.to_string() == s).ok_or_else(|| WorkloadError::UnknownProgram(s.to_owned()))
    }
}

/// How much of the output each run demands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Demand {
    #[default]
    All,
    /// Only the last element of the output.
    One,
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Demand::All => "all",
            Demand::One => "one",
        })
    }
}

impl FromStr for Demand {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, WorkloadError> {
        match s {
            "all" => Ok(Demand::All),
            "one" => Ok(Demand::One),
            _ => Err(WorkloadError::UnknownDemand(s.to_owned())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Workload {
    pub program: Program,
    pub n: usize,
    pub seed: u64,
    pub demand: Demand,
}

impl Workload {
    pub fn new(program: Program, n: usize) -> Workload {
        Workload { program, n, seed: 0, demand: Demand::All }
    }
}

/// Kinds of outer-layer change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditKind {
    /// Insert a new element before position `pos`.
    Insert,
    /// Remove the element at `pos`.
    Delete,
    /// Give the element at `pos` a new value.
    Replace,
    /// Exchange the elements at `pos` and `pos + 1`.
    Swap,
    /// Grow the input: append one element to a list, or enlarge an
    /// interpreter program's size parameter.
    Ext,
}

impl EditKind {
    pub const ALL: [EditKind; 5] = [EditKind::Insert, EditKind::Delete, EditKind::Replace, EditKind::Swap, EditKind::Ext];

    pub fn label(self) -> &'static str {
        match self {
            EditKind::Insert => "insert",
            EditKind::Delete => "delete",
            EditKind::Replace => "replace",
            EditKind::Swap => "swap",
            EditKind::Ext => "ext",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EditKind {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, WorkloadError> {
        match s {
            "repl" => Ok(EditKind::Replace),
            _ => EditKind::ALL.into_iter().find(|k| k.label() == s).ok_or_else(|| WorkloadError::UnknownEdit(s.to_owned())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScriptEdit {
    pub kind: EditKind,
    pub pos: usize,
}

impl fmt::Display for ScriptEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind, self.pos)
    }
}

pub type EditScript = Vec<ScriptEdit>;

/// Ten positions spread evenly through a list of length `n`: the middles of
/// ten equal slices.
pub fn even10(n: usize) -> Vec<usize> {
    (0..10).map(|k| (2 * k + 1) * n / 20).collect()
}

/// Parse `even10` or a comma-separated list of indices.
pub fn parse_positions(spec: &str, n: usize) -> Result<Vec<usize>, WorkloadError> {
    if spec == "even10" {
        return Ok(even10(n));
    }
    spec.split(',').map(|p| p.trim().parse().map_err(|_| WorkloadError::BadPositions(spec.to_owned()))).collect()
}

/// For each position, each kind in order. Listing `insert` before `delete`
/// makes every deletion revert the insertion just made.
pub fn script(kinds: &[EditKind], positions: &[usize]) -> EditScript {
    positions.iter().flat_map(|&pos| kinds.iter().map(move |&kind| ScriptEdit { kind, pos })).collect()
}

/// Check that every edit fits the list as earlier edits leave it.
pub fn validate(w: &Workload, edits: &[ScriptEdit]) -> Result<(), WorkloadError> {
    if w.n == 0 {
        return Err(WorkloadError::EmptyInput);
    }
    if w.program.is_imp() {
        return match edits.iter().find(|e| matches!(e.kind, EditKind::Insert | EditKind::Delete)) {
            Some(e) => Err(WorkloadError::Unsupported { program: w.program.clone(), kind: e.kind }),
            None => Ok(()),
        };
    }
    let mut len = w.n;
    for (index, &edit) in edits.iter().enumerate() {
        let ok = match edit.kind {
            EditKind::Insert => edit.pos <= len,
            EditKind::Delete | EditKind::Replace => edit.pos < len,
            EditKind::Swap => edit.pos + 1 < len,
            EditKind::Ext => true,
        };
        if !ok {
            return Err(WorkloadError::BadPosition { index, edit, len });
        }
        match edit.kind {
            EditKind::Insert | EditKind::Ext => len += 1,
            EditKind::Delete => len -= 1,
            _ => {}
        }
    }
    Ok(())
}
