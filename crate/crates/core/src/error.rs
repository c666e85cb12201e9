use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("AUC undefined: labels must contain both classes (n0={n0}, n1={n1})")]
    UndefinedAuc { n0: usize, n1: usize },

    #[error("guesses are not pairwise distinct (indices {first} and {second} share a score)")]
    TiedGuesses { first: usize, second: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("at least 2 scores are required, found {0}")]
    TooFewScores(usize),

    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),

    #[error("label at index {index} is {value}, expected 0 or 1")]
    InvalidLabel { index: usize, value: u8 },

    #[error("probability at index {index} is {value}, expected a value strictly inside (0, 1)")]
    InvalidProbability { index: usize, value: f64 },

    #[error("invalid fraction: {0}")]
    InvalidFraction(String),

    #[error("invalid class counts: n0={n0}, n1={n1} for {n} guesses")]
    InvalidClassCounts { n0: usize, n1: usize, n: usize },

    #[error("query budget exhausted")]
    BudgetExhausted,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no labeling attains the requested AUC")]
    NoSatisfyingLabeling,

    #[error("enumeration over {n} examples exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid construction: {0}")]
    InvalidConstruction(String),

    #[error("could not draw a two-class test set after {0} attempts")]
    ResampleLimit(usize),

    #[error("no records to aggregate")]
    EmptyRecords,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
