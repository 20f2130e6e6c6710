use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}: line {line}: {message}")]
    Malformed {
        file: String,
        line: u64,
        message: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),

    #[error("forward-in-time citation {citing} -> {cited} (citing month {citing_month} precedes cited month {cited_month})")]
    ForwardCitation {
        citing: String,
        cited: String,
        citing_month: i32,
        cited_month: i32,
    },

    #[error("citation {citing} -> {cited} references an unknown document id `{missing}`")]
    UnknownEdgeEndpoint {
        citing: String,
        cited: String,
        missing: String,
    },

    #[error("unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("invalid window [{from}, {to})")]
    InvalidWindow { from: i32, to: i32 },

    #[error("document `{doc}` is censored: window ends at month {needed} beyond horizon {horizon}")]
    Censored {
        doc: String,
        needed: i32,
        horizon: i32,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero variance in `{0}`")]
    ZeroVariance(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no non-censored documents at latency {0} months")]
    EmptyLatency(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
