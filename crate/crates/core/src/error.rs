use thiserror::Error;

/// Errors raised by the algebra, the p-adic oracle and the CLI plumbing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("operands live over different fields Q(sqrt {0}) and Q(sqrt {1})")]
    MixedPrime(u64, u64),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),

    #[error("character has a zero coordinate at position {0}")]
    ZeroCoordinate(usize),

    #[error("index {index} out of range 1..={n}")]
    OutOfRange { index: usize, n: usize },

    #[error("not a dominant cocharacter: {0:?}")]
    NotDominant(Vec<i64>),

    #[error("polynomial is not invariant under the symmetric group")]
    NotInvariant,

    #[error("Hall-Littlewood normalisation v_lambda(t) vanishes")]
    DegenerateParameter,

    #[error("inexact polynomial division (nonzero remainder)")]
    InexactDivision,

    #[error("matrix is singular")]
    Singular,

    #[error("entry {0} is not in Z[1/p]")]
    NotPIntegral(String),

    #[error("outside the enumeration bounds: {0}")]
    Bounds(String),

    #[error("constant term not stable between truncation {level} and {next}: {lower} vs {upper}")]
    Unstable {
        level: u32,
        next: u32,
        lower: String,
        upper: String,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("orbit is not regular")]
    NotRegular,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
