use thiserror::Error;

/// Errors raised by the exact engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("radicand mismatch: {0} vs {1}")]
    RadicandMismatch(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("rank must satisfy 2 <= r <= {max}, got {got}")]
    InvalidRank { got: i64, max: u32 },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u32, u32),

    #[error("letter {letter} is not a generator of rank {rank}")]
    LetterOutOfRange { letter: i32, rank: u32 },

    #[error("word is not reduced: letters {pos} and {next} cancel", next = .pos + 1)]
    NotReduced { pos: usize },

    #[error("the identity is not allowed here: {0}")]
    EmptyWord(&'static str),

    #[error("length {requested} is shorter than the prefix length {prefix}")]
    LengthBelowPrefix { requested: usize, prefix: usize },

    #[error("cylinder of depth {depth} is too shallow to determine the value for |gamma| = {gamma_len}")]
    TooShallow { depth: usize, gamma_len: usize },

    #[error("cannot refine from depth {from} down to depth {to}")]
    RefineBelowDepth { from: usize, to: usize },

    #[error("step function has {got} values, expected {expected} for depth {depth}")]
    ValueCount {
        got: usize,
        expected: usize,
        depth: usize,
    },

    #[error("word {0} is a prefix of gamma")]
    PrefixOfGamma(String),

    #[error("exact integer accumulator overflow")]
    Overflow,

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u128, cap: u128 },

    #[error("averaging requires n >= 1")]
    ZeroSphere,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
