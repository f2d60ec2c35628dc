//! Detection and interactive resolution of inconsistencies between a
//! model's geometry and its geometric constraint system.
//!
//! The model geometry is used as a witness configuration: the constraint
//! system is linearised there, over-constrained parts are found as sparsest
//! row dependencies of the perturbation matrix, well-constrained parts as
//! group-sparse fits of the nominal motions, and resolution options are
//! generated, ranked and applied through a [`Session`].

pub mod analyzer;
pub mod error;
pub mod kernels;
pub mod linearizer;
pub mod model;
pub mod options;
pub mod over;
pub mod prioritizer;
pub mod session;
pub mod tolerance;
pub mod well;

pub use analyzer::{analyze, classify, Analysis, ConstraintState};
pub use error::{Error, Result};
pub use model::{
    measure_parameter, parse_model, serialize_model, update_gcs_after_edit, Constraint,
    ConstraintId, ConstraintKind, EntityId, EntityKind, GeometricEntity, Model,
};
pub use options::{over_options, revalidate, under_options, Action, ResolutionOption, Target};
pub use over::{detect_minimal_over_parts, greedy_over_baseline, OverPart};
pub use prioritizer::{
    candidate_change_rate, change_rate, compare, prioritize, summed_change_rate, type_precedence,
    Mode,
};
pub use session::{replay, JournalEntry, Phase, Presentation, Session, Verdict};
pub use well::{
    detect_maximal_well_parts, greedy_well_baseline, is_induced_well, is_part_maximal,
    is_part_maximal_among, is_part_well, WellPart,
};
