use thiserror::Error;

/// Errors raised by the library. Every variant is an input or precondition
/// problem; analysis outcomes (no witness, not Pisot, ...) are values, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),

    #[error("letter index {0} is out of range for an alphabet of size {1}")]
    LetterOutOfRange(usize, usize),

    #[error("duplicate letter {0:?} in alphabet")]
    DuplicateLetter(char),

    #[error("alphabet must contain at least one letter")]
    EmptyAlphabet,

    #[error("image of letter {0:?} is empty")]
    EmptyImage(char),

    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: duplicate rule for letter {letter:?}")]
    DuplicateRule { line: usize, letter: char },

    #[error("line {line}: symbol {symbol:?} in the image of {letter:?} has no rule")]
    UndeclaredSymbol {
        line: usize,
        letter: char,
        symbol: char,
    },

    #[error("letter {letter:?} is not a periodic seed of period {period}")]
    NotPeriodicSeed { letter: char, period: usize },

    #[error("power must be at least 1")]
    ZeroPower,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("improper path: the first label is empty but the path has {0} labels")]
    ImproperPath(usize),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
