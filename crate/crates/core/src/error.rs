use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A disorder or model specification violates one of its invariants.
    InvalidSpec(String),
    /// The operation needs a non-degenerate disorder law.
    DegenerateDisorder,
    /// Division by the inverse temperature at `beta == 0`.
    BetaZero,
    /// An argument lies outside the domain where the quantity is defined.
    OutOfDomain(String),
    /// `lambda(2 beta) - 2 lambda(beta) - log d <= 0` where it must be positive.
    NonpositiveDenominator {
        beta: f64,
        value: f64,
    },
    /// `t*` is requested with `d1 == 1`, where the admissible interval is empty.
    DegenerateDefectArity,
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    /// The tree has more nodes at the requested depth than the node budget allows.
    DepthTooLarge {
        depth: u32,
        leaves: u128,
        budget: u64,
    },
    WrongModelKind(&'static str),
    /// Exhaustive enumeration would exceed its size cap.
    SupportTooLarge {
        assignments: u128,
        limit: u64,
    },
    /// Exhaustive enumeration needs finite-support disorder.
    ContinuousDisorder,
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid specification: {msg}"),
            Error::DegenerateDisorder => {
                write!(f, "operation requires non-degenerate disorder")
            }
            Error::BetaZero => write!(f, "beta must be strictly positive"),
            Error::OutOfDomain(msg) => write!(f, "out of domain: {msg}"),
            Error::NonpositiveDenominator { beta, value } => write!(
                f,
                "lambda(2b) - 2 lambda(b) - log d = {value} is not positive at beta = {beta}"
            ),
            Error::DegenerateDefectArity => {
                write!(
                    f,
                    "t* is degenerate for d1 = 1 (admissible interval is empty)"
                )
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::DepthTooLarge {
                depth,
                leaves,
                budget,
            } => write!(
                f,
                "depth {depth} needs {leaves} leaves, exceeding the node budget {budget}"
            ),
            Error::WrongModelKind(msg) => write!(f, "wrong model kind: {msg}"),
            Error::SupportTooLarge { assignments, limit } => write!(
                f,
                "{assignments} disorder assignments exceed the enumeration limit {limit}"
            ),
            Error::ContinuousDisorder => {
                write!(f, "exact enumeration requires finite-support disorder")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
