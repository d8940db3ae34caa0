use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("argument is not certifiably positive")]
    NonPositiveArgument,
    #[error("directed sequence is not monotone")]
    MonotonicityViolation,
    #[error("precision exhausted after {bits} working bits")]
    PrecisionExhausted { bits: u64 },
    #[error("numerator and denominator share a root")]
    NotCoprime,
    #[error("map degree must be at least 2, got {0}")]
    DegreeTooLow(usize),
    #[error("no chart separates the point from zero and infinity")]
    ChartFailure,
    #[error("tree depth {needed} exceeds the limit {limit}")]
    DepthLimit { needed: u64, limit: u64 },
    #[error("weights must be positive and sum to one")]
    NotProbability,
    #[error("duplicate atom in measure")]
    DuplicateAtom,
    #[error("measures live on different spaces")]
    SpaceMismatch,
    #[error("total masses differ")]
    MassMismatch,
    #[error("image of an atom is not exactly representable")]
    InexactImage,
    #[error("subdivision rule is inconsistent: {0}")]
    InvalidRule(String),
    #[error("complex was generated by a different rule")]
    RuleMismatch,
    #[error("point is not a vertex of the complex")]
    NotAVertex,
    #[error("point lies on the forward orbit of infinity")]
    ExcludedPoint,
    #[error("no admissible anchor among the first {0} ideal points")]
    ExcludedAnchor(u64),
    #[error("cannot evaluate at {0}")]
    EvaluationFailure(String),
    #[error("map is not injective on the support of the measure")]
    NotInjectiveOnSupport,
    #[error("map is not injective on patch {0}")]
    NotInjectiveOnPatch(usize),
    #[error("Jacobian is not positive at an atom")]
    NonPositiveJacobian,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
