use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid qubit support: {0}")]
    InvalidSupport(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("too many qubits: {got} exceeds the limit of {max}")]
    TooManyQubits { got: usize, max: usize },

    #[error("circuit contains an opaque gate; expected the U3/CX basis")]
    NotElementary,

    #[error("fewer than two CX gates")]
    FewerThanTwoCx,

    #[error("no pair of CX gates shares exactly one qubit")]
    NoSharingPair,

    #[error("could not choose distinct qubits for the inserted gate after {0} attempts")]
    QubitChoiceExhausted(usize),

    #[error("qasm parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported qasm construct on line {line}: {msg}")]
    Unsupported { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank-deficient least-squares problem: {0}")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
