use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group specification `{0}`")]
    InvalidGroup(String),

    #[error("invalid cyclic order {0}: every factor must be at least 1")]
    InvalidModulus(u64),

    #[error("malformed sequence term `{term}`: {reason}")]
    MalformedTerm { term: String, reason: String },

    #[error("element has {found} coordinates but the group has rank {expected}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("sequences live over different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },

    #[error("`{divisor}` does not divide `{sequence}`")]
    NotADivisor { divisor: String, sequence: String },

    #[error("{what}: {actual} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, actual: u64, cap: u64 },

    #[error("the given elements do not form a subgroup of {0}")]
    NotASubgroup(String),

    #[error("{0}")]
    Undefined(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed: {0}")]
    ConstructionFailed(String),
}
