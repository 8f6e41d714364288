use thiserror::Error;

/// Errors raised by the structural layer: malformed trees, tables and
/// out-of-range lookups.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("tree {tree}: unknown vertex `{vertex}`")]
    UnknownVertex { tree: usize, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownName(String),
    #[error("tree index {tree} out of range 1..={n}")]
    UnknownTree { tree: usize, n: usize },
    #[error("tree {tree} is empty")]
    EmptyTree { tree: usize },
    #[error("duplicate vertex `{vertex}`")]
    DuplicateVertex { vertex: String },
    #[error("tree {tree}: duplicate edge {u}-{v}")]
    DuplicateEdge { tree: usize, u: String, v: String },
    #[error("tree {tree}: self loop at `{vertex}`")]
    SelfLoop { tree: usize, vertex: String },
    #[error("tree {tree} is not a tree: {reason}")]
    NotATree { tree: usize, reason: String },
    #[error("tuple has length {got}, expected {expected}")]
    TupleArity { expected: usize, got: usize },
    #[error("codistance table: {0}")]
    Table(String),
    #[error("codistance {value} does not fit the storage type")]
    Overflow { value: u64 },
    #[error("need at least one tree")]
    NoTrees,
}
