use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid letter {letter:?} for {signature}")]
    InvalidLetter { letter: char, signature: String },

    #[error("word {0:?} is not reduced")]
    NotReduced(String),

    #[error("inverse letters are not available over a monoid")]
    MonoidHasNoInverses,

    #[error("signature mismatch: expected {expected}, found {found}")]
    SignatureMismatch { expected: String, found: String },

    #[error("resource limit: {what} needs {needed} items, cap is {cap}")]
    ResourceLimit { what: String, needed: u128, cap: usize },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("depth {got} is too small, need at least {needed}")]
    DepthTooSmall { needed: usize, got: usize },

    #[error("resolution 2^-{k} is too coarse for step {step}")]
    ResolutionTooCoarse { k: u32, step: usize },

    #[error("resolution 2^-{k} needs comparison depth at least {needed}, got {depth}")]
    ResolutionDepthMismatch { k: u32, depth: usize, needed: usize },

    #[error("points {0} and {1} agree to the comparison depth")]
    DuplicatePoints(usize, usize),

    #[error("search budget of {0} nodes exhausted")]
    SearchBudgetExhausted(u64),

    #[error("pseudo-orbit defect {defect} at site {site:?} letter {letter} is not below {delta}")]
    DefectTooLarge {
        site: String,
        letter: String,
        defect: String,
        delta: String,
    },

    #[error("radius {radius} is too small, witness needs {needed}")]
    RadiusTooSmall { radius: usize, needed: usize },

    #[error("point set is not chain-constrained transitive: {0}")]
    NotCict(String),

    #[error("point set has no i,j-final witness: {0}")]
    NotIbtStar(String),

    #[error("point set has no final witness: {0}")]
    NotIbtCirc(String),

    #[error("stage sites disagree at {site:?}")]
    SeamConflict { site: String },

    #[error("no shadowing oracle is available for this action")]
    OracleUnavailable,

    #[error("verification failed: {0}")]
    Verification(String),
}
