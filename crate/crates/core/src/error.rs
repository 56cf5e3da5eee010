use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: alternative `{name}` appears more than once in the ranking")]
    DuplicateAlternativeInRanking { line: usize, name: String },

    #[error("line {line}: unknown alternative `{name}`")]
    UnknownAlternative { line: usize, name: String },

    #[error("line {line}: ranking does not list every alternative")]
    IncompleteRanking { line: usize },

    #[error("profile contains no ballots")]
    EmptyProfile,

    #[error("edge {0}->{1} conflicts with an edge already given for the same pair")]
    ConflictingEdge(usize, usize),

    #[error("self loop on alternative {0}")]
    SelfLoop(usize),

    #[error("edge {from}->{to} has non-positive weight {weight}")]
    NonPositiveWeight { from: usize, to: usize, weight: i64 },

    #[error("alternative id {0} is out of range")]
    AlternativeOutOfRange(usize),

    #[error("invalid margin graph: {0}")]
    InvalidGraph(String),

    #[error("tiebreaker is missing edge {0}->{1}")]
    MissingEdge(usize, usize),

    #[error("tiebreaker lists edge {0}->{1} more than once")]
    DuplicateEdge(usize, usize),

    #[error("tiebreaker is not descending at index {index}")]
    NotDescending { index: usize },

    #[error("edge {0}->{1} is not a positive-margin edge of the graph")]
    EdgeNotInGraph(usize, usize),

    #[error("edge order is not a descending ordering of the positive edges: {0}")]
    BadEdgeOrder(String),

    #[error("margin graph has pairwise ties; the rule requires a strict margin graph")]
    NonStrictMarginGraph,

    #[error("{count} tiebreaker universes exceed the limit of {limit}")]
    UniverseLimitExceeded { count: BigUint, limit: u64 },

    #[error("computation exceeded its time budget")]
    TimedOut,

    #[error("could not generate a suitable profile within {0} attempts")]
    AttemptsExhausted(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
