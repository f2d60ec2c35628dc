use thiserror::Error;

/// Errors produced while building, analysing or resolving a constraint model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("document schema violation: {0}")]
    Schema(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("constraint `{constraint}` references missing entity `{entity}`")]
    DanglingReference { constraint: String, entity: String },

    #[error("entity `{entity}`: {reason}")]
    InvalidEntity { entity: String, reason: String },

    #[error("constraint `{constraint}`: {reason}")]
    Inadmissible { constraint: String, reason: String },

    #[error("constraint kind {0} carries no parameter")]
    NotParameterized(String),

    #[error("geometric degeneracy: {0}")]
    Degenerate(String),

    #[error("witness residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    WitnessInvalid { residual: f64, tolerance: f64 },

    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("no null vector independent of the {0} prior vectors exists")]
    NoIndependentNullVector(usize),

    #[error("oracle bound exceeded: {size} > {bound}")]
    OracleBound { size: usize, bound: usize },

    #[error("model is not over-constrained")]
    NotOverConstrained,

    #[error("model contains over-constrained parts")]
    OverConstraintPresent,

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown constraint `{0}`")]
    UnknownConstraint(String),

    #[error("entity set is not a well-constrained part")]
    PartNotWell,

    #[error("well-constrained parts overlap on `{0}`")]
    PartsOverlap(String),

    #[error("constraint `{0}` is not a member of the over-constrained part")]
    OutsidePart(String),

    #[error("candidate `{0}` would introduce over-constraint")]
    CandidateOverConstrains(String),

    #[error("candidate `{0}` has vanishing rows at the witness")]
    DegenerateCandidate(String),

    #[error("cannot compare a removal option with an addition option")]
    MixedFlags,

    #[error("session is already well-constrained")]
    AlreadyWell,

    #[error("option `{0}` is not part of the current presentation")]
    StaleOption(String),

    #[error("option `{0}` is unknown to this session")]
    UnknownOption(String),

    #[error(
        "cannot reject `{0}`: it is the last option of a minimal over-constrained part, \
         and at least one constraint of the part must be removed"
    )]
    ForcedRemoval(String),

    #[error("no valid resolution option exists for the remaining inconsistency: {0}")]
    NoValidOptions(String),

    #[error("nothing to undo")]
    EmptyUndo,

    #[error("journal replay failed: {0}")]
    Journal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
