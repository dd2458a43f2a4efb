use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet size must be in [2, 256], got {0}")]
    InvalidAlphabet(u32),

    #[error("lattice length must be at least 3, got {0}")]
    LatticeTooShort(usize),

    #[error("configuration count {alphabet}^{len} does not fit in 64 bits")]
    IndexOverflow { alphabet: u32, len: usize },

    #[error("cell {position} has state {state}, outside [0, {alphabet})")]
    CellOutOfRange {
        position: usize,
        state: u32,
        alphabet: u32,
    },

    #[error("expected {expected} cells, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("configuration index {index} out of range (count {count})")]
    IndexOutOfRange { index: u64, count: u64 },

    #[error("rule number {0} out of range [0, 255]")]
    RuleNumberOutOfRange(u32),

    #[error("rule table needs {expected} entries, got {actual}")]
    RuleTableSize { expected: usize, actual: usize },

    #[error("rule number requires a binary alphabet, got s = {0}")]
    NotElementary(u32),

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("lattice mismatch between operands")]
    SpecMismatch,

    #[error("exhaustive check needs {needed} configurations, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("dense matrix dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: u64, cap: u64 },

    #[error("global map is not bijective")]
    NotBijective,

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("gate matrix needs {expected} entries, got {actual}")]
    GateSize { expected: usize, actual: usize },

    #[error("partition sizes must be positive and their product at most 256")]
    PartitionSize,

    #[error("invalid scan request: {0}")]
    InvalidRequest(String),

    #[error("report lacks rule {missing} at n = {n} (partner of {rule})")]
    IncompleteCoverage { n: usize, rule: u8, missing: u8 },

    #[error("unsupported report format `{0}`")]
    UnsupportedFormat(String),

    #[error("report parse error: {0}")]
    Parse(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
