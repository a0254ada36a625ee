use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("duplicate variable `{0}` in alphabet")]
    DuplicateVariable(String),

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: String, right: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("cannot embed alphabet {from} into {into}: {reason}")]
    NotEmbeddable {
        from: String,
        into: String,
        reason: String,
    },

    #[error("invalid renaming: {0}")]
    InvalidRenaming(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("state space of {size} states exceeds the limit of {limit}; raise the limit (--max-states) or shrink the domains")]
    StateSpaceTooLarge { size: u128, limit: u64 },

    #[error("{0}")]
    Shape(String),

    #[error("policy excludes all observations")]
    EmptyBaseline,

    #[error("search too large: {0}")]
    SearchTooLarge(String),
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;
