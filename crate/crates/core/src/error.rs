use thiserror::Error;

/// Failures while decoding the textual encodings used in traces and fixtures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed dyadic `{0}`")]
    Dyadic(String),
    #[error("malformed interval prefix `{0}`")]
    Prefix(String),
    #[error("malformed clopen set `{0}`")]
    Clopen(String),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("{0} is not a negative power of two")]
    NotPowerOfTwo(String),
    #[error("depth {0} exceeds the supported maximum of 127")]
    DepthExceeded(u64),
    #[error("insufficient free measure: have {have}, need {need}")]
    InsufficientMeasure { have: String, need: String },
}

/// Why a strategy could not produce a move; reported as a forfeit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("insufficient active vertices: have {have}, need {need}")]
    InsufficientActiveVertices { have: String, need: String },
    #[error("protocol desync: {0}")]
    ProtocolDesync(String),
    #[error("no free interval for {0}")]
    NoFreeInterval(String),
    #[error("no unassigned region left for size {0}")]
    NoUnassignedRegion(String),
    #[error("no inactive color left for string {0}")]
    NoInactiveColorLeft(u64),
    #[error("no candidate block: {0}")]
    NoCandidateBlock(String),
    #[error("script exhausted")]
    ScriptExhausted,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlainError {
    #[error("degree promise violated at vertex {vertex}, level {level}")]
    DegreePromiseViolated { level: u32, vertex: u64 },
    #[error("capacity exceeded: more than {capacity} strings")]
    CapacityExceeded { capacity: u128 },
    #[error("m = {m} exceeds n/2 = {half}")]
    OverlapRegime { m: u32, half: u32 },
    #[error("row sum exceeded at {vertex}: {sum} > 1")]
    RowSumExceeded { vertex: u64, sum: String },
    #[error("carve failed: {0}")]
    CarveFailed(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}
