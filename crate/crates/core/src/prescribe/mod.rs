//! What-if modifications, automatic recommendations and target-conditioned
//! prescriptions.

mod modify;
mod recommend;
mod xyz;

pub use modify::{apply_modification, Modification, ModificationKind};
pub use recommend::{
    probe_modification, recommend, select_features, Direction, Recommendation, Recommendations, PROBE_AMPLITUDE,
};
pub use xyz::{compare_prescription, xyz_prescribe, PrescribeMode, PrescriptionReport};
