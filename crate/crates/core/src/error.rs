use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element does not belong to ring `{ring}`")]
    ForeignElement { ring: String },

    #[error("ring `{ring}` has {size} elements, exceeding the materialization cap of {cap}")]
    CapExceeded { ring: String, size: u128, cap: usize },

    #[error("ring `{ring}` has {size} elements and cannot be enumerated; materialize a subring first")]
    EnumerationUnavailable { ring: String, size: u128 },

    #[error("ring `{0}` is not materialized")]
    NotMaterialized(String),

    #[error("ring size overflows")]
    SizeOverflow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("`{0}` is not idempotent")]
    NotIdempotent(String),

    #[error("unsupported bimodule: {0}")]
    UnsupportedBimodule(String),

    #[error("element set is not closed under the ring operations")]
    NotClosed,

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("element is not series-structured: {0}")]
    WrongBackend(String),

    #[error("ring has {size} elements; the maximal-ideal oracle is limited to {cap}")]
    OracleCapExceeded { size: usize, cap: usize },

    #[error("polynomials are over different rings")]
    RingMismatch,

    #[error(
        "exhaustive search needs about {estimate} candidate polynomials, over the budget of {budget}; \
         use sampled mode or raise the budget"
    )]
    BudgetExceeded { estimate: u128, budget: u128 },

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}
