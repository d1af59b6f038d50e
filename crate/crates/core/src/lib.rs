//! Exact computations with Schauder frames in ℓ1, ℓ2 and c0: partial-sum
//! operators, associated norms, composition-decay schedules and frames
//! assembled from finite-rank approximations of the identity.

pub mod auerbach;
pub mod domination;
pub mod error;
pub mod experiments;
pub mod frame;
pub mod linalg;
pub mod nksearch;
pub mod norms;
pub mod operator;
pub mod pelczynski;
pub mod scalar;
pub mod schedule;
pub mod space;
pub mod vector;

pub use auerbach::{auerbach_basis, AuerbachSystem};
pub use domination::{domination_probe, ell1plus_prefix_test, DominationWitness, Ell1PlusReport};
pub use error::{FrameError, Result};
pub use frame::{
    analysis, frame_constant, partial_reconstruction, shrinking_tail_bound, synthesis, BuiltinFrame,
    CanonicalBasis, Example23, FrameProvider, FrameSpec,
};
pub use nksearch::{find_schedule, validate_schedule, ValidationReport};
pub use norms::{k_subnorm, min_norm, min_norm_closed_form_ex23, nk_norm, subsequence_norm, KIndexSet, NormReport};
pub use operator::{operator_norm, FiniteRankOperator, RankOne};
pub use pelczynski::{assemble_bap_frame, split_operator, verify_pel, AssembledFrame, SplitRule, SplitSystem};
pub use scalar::{Certified, NormValue, Scalar};
pub use schedule::NkSchedule;
pub use space::AmbientSpace;
pub use vector::CoefVector;
