use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n = {0} is not prime")]
    NotPrime(u64),

    #[error("n = {0} is even; an odd prime is required")]
    EvenModulus(u64),

    #[error("{what} for p = {p} needs {required} bytes, budget is {budget}")]
    MemoryBudget {
        what: &'static str,
        p: u64,
        required: u64,
        budget: u64,
    },

    #[error("character index j = {j} has parity {j_parity} but {requested} was requested")]
    ParityMismatch {
        j: u64,
        j_parity: &'static str,
        requested: &'static str,
    },

    #[error("x must be positive, got {0}")]
    NonPositiveX(f64),

    #[error("the principal character j = 0 has no functional equation")]
    PrincipalCharacter,

    #[error("character index j = {j} out of range [0, {max}]")]
    IndexRange { j: u64, max: u64 },

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("set has {len} elements, above the brute-force cap {cap}; use the fast path")]
    NaiveCapExceeded { len: usize, cap: usize },

    #[error("{what}: {needed} units exceed budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("invalid parameters: {0}")]
    InvalidArgument(String),

    #[error("invalid integer set: {0}")]
    InvalidSet(String),

    #[error("mollifier built for p = {spec_p} used with group for p = {group_p}")]
    GroupMismatch { spec_p: u64, group_p: u64 },

    #[error("cache file rejected: {0}")]
    CacheFormat(String),

    #[error("high-precision evaluation failed: {0}")]
    HighPrecision(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
