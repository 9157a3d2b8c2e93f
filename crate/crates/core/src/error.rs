use alloc::string::String;

/// Errors raised by the core library.
///
/// Every variant that stems from a failed structural check names the
/// violated invariant and the worst-offending entry.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {offending_row} has {cols} columns")]
    NotSquare {
        rows: usize,
        offending_row: usize,
        cols: usize,
    },
    #[error("transition matrix is not stochastic: {detail} (worst entry at row {row}, column {col}, value {value})")]
    NotStochastic {
        detail: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("distribution is not stationary: (mu^T A - mu^T)[{state}] = {deviation}")]
    NotStationary { state: usize, deviation: f64 },
    #[error("chain is not reversible: mu[{i}]*A[{i}][{j}] = {forward} but mu[{j}]*A[{j}][{i}] = {backward}")]
    NotReversible {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("stationary distribution is not unique: fixed space has dimension {dimension}")]
    NoUniqueStationary { dimension: usize },
    #[error("stationary mass of state {state} is zero; restrict the chain to its support first")]
    ZeroStationaryMass { state: usize },
    #[error("invalid probability distribution: {detail} (entry {index}, value {value})")]
    InvalidDistribution {
        detail: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("invalid sign system: {0}")]
    InvalidSigns(String),
    #[error("weights violate the {variant} condition at index {index}")]
    InvalidWeights { variant: &'static str, index: usize },
    #[error("dimension mismatch: {what} expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("weight at index {index} is not an integer: {value}")]
    NonIntegerWeights { index: usize, value: f64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("quadrature did not reach tolerance {tolerance} within {max_intervals} intervals")]
    QuadratureNonConvergence { tolerance: f64, max_intervals: usize },
    #[error("dimension {0} is not supported by this operation")]
    UnsupportedDimension(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bound degenerates at lambda = 1")]
    DegenerateGap,
    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("cannot fit a constant over an empty family")]
    EmptyFamily,
    #[error("expander construction needs an even k, got {0}")]
    OddK(u32),
    #[error("graph with {vertices} vertices exceeds the certification budget of {limit}")]
    TooLarge { vertices: usize, limit: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("sign count {n} is not a multiple of the block length {k}")]
    IndivisibleLength { n: usize, k: usize },
    #[error("eigen solver failed: {0}")]
    EigenSolver(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
