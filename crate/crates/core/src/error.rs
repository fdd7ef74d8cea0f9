use thiserror::Error;

/// Errors produced while building, querying, loading or tuning an index.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("epsilon out of range: {0}")]
    EpsilonOutOfRange(u64),
    #[error("unsorted input at position {0}")]
    UnsortedInput(usize),
    #[error("invalid key at position {0}")]
    InvalidKey(usize),
    #[error("oracle size limit: {len} points exceed {limit}")]
    OracleSizeLimit { len: usize, limit: usize },
    #[error("invalid probability {value} at position {index}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    UnnormalizedDistribution(f64),
    #[error("multiway fanout must be at least 2, got {0}")]
    InvalidFanout(usize),
    #[error("model family is empty")]
    EmptyFamily,

    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated input")]
    Truncated,
    #[error("key type mismatch: expected tag {expected}, found {found}")]
    KeyTypeMismatch { expected: u8, found: u8 },
    #[error("unknown router tag {0}")]
    UnknownRouter(u8),
    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("insufficient samples")]
    InsufficientSamples,
    #[error("infeasible space budget: smallest achievable index is {min_bytes} bytes")]
    InfeasibleSpace { min_bytes: u64 },
    #[error("infeasible time budget: best measured time is {best_seconds:e} s")]
    InfeasibleTime { best_seconds: f64 },
    #[error("invalid tuner request: {0}")]
    InvalidRequest(String),
    #[error("non-monotone space samples: s_L({eps_a}) = {s_a} < s_L({eps_b}) = {s_b}")]
    NonMonotone {
        eps_a: u64,
        s_a: usize,
        eps_b: u64,
        s_b: usize,
    },

    #[error("unknown dataset kind: {0}")]
    UnknownKind(String),
    #[error("workload key type does not match the dataset")]
    KeyTypeMismatchWorkload,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated
        } else {
            Error::Io(e.to_string())
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
