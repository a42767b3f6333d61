use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("instance has no agents")]
    EmptyInstance,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("agent {agent} influences itself")]
    SelfLoop { agent: usize },
    #[error("agent {agent} has an empty value interval (a >= b)")]
    DegenerateInterval { agent: usize },
    #[error("agent {agent} has a negative lower value bound")]
    NegativeLowerBound { agent: usize },
    #[error("negative influence from agent {from} on agent {to}")]
    NegativeInfluence { from: usize, to: usize },
    #[error("agent {agent} is assigned to group {group}, outside 0..{k}")]
    InvalidGroup { agent: usize, group: usize, k: usize },
    #[error("price offsets must be non-negative")]
    NegativeOffset,
    #[error("prices must be non-negative")]
    NegativePrice,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix has a negative entry")]
    NonNegativityViolated,
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("base price of group {group} is not positive")]
    ZeroBasePrice { group: usize },
    #[error("eps must lie strictly between 0 and 1")]
    EpsOutOfRange,
    #[error("grid has {candidates} candidates, above the cap of {cap}")]
    GridTooLarge { candidates: u128, cap: u128 },
    #[error("delta must lie strictly between 0 and 1/2")]
    DeltaOutOfRange,
    #[error("every coordinate of the {block} block is at most delta")]
    DegenerateExtraction { block: char },
    #[error("payoff entry out of [-1, 1]")]
    PayoffOutOfRange,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that report a broken algorithmic invariant rather than
    /// bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InternalInvariantViolation(_))
    }
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::InternalInvariantViolation(msg.into())
}
