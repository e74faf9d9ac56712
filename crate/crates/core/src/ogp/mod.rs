//! Replica trees, correlated instance families and forbidden structures.

pub mod bounds;
pub mod forbidden;
pub mod joint;
pub mod tree;

pub use bounds::{enum_count_log, forbidden_prob_bound_log, prob_bound_log, BoundReport};
pub use forbidden::{
    assemble_mv, build_ev, gamma_star, is_forbidden, outputs_to_candidate, Collision,
    Extraction, ForbiddenCandidate, Verdict, Violation,
};
pub use joint::{estimate_joint_success, CoinMode, JointReport, JointTrial};
pub use tree::{correlated_instances, CorrelatedFamily, LeafTensor, ReplicaTree, Vertex};
