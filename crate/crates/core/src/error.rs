use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("negative lag {0}")]
    NegativeLag(i64),
    #[error("self edge on `{0}` at lag 0")]
    SelfEdge(String),
    #[error("contemporaneous directed cycle through `{0}`")]
    ContemporaneousCycle(String),
    #[error("template has bidirected entries; use its canonical ts-DAG")]
    BidirectedEntries,
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex sets overlap at {0}")]
    Overlap(String),
    #[error("endpoints must differ, got {0} twice")]
    SameEndpoint(String),
    #[error("graph is not a DAG: {0}")]
    NotADag(String),
    #[error("observed set is empty")]
    EmptyObserved,
    #[error("empty coefficient list")]
    EmptyList,
    #[error("window {w} is shorter than {need}")]
    WindowTooShort { w: u64, need: u64 },
    #[error("{n} observed vertices exceed the enumeration guard of {guard}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("summary graph has no edge {0} -> {1}")]
    MissingEdge(String, String),
    #[error("summary graph is not weakly acyclic: {0}")]
    NotWeaklyAcyclic(String),
    #[error("integer overflow")]
    Overflow,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
