//! Group-fairness calculus.
//!
//! A group-based metric is `|a/b - c/d|` where `a, b` are expectations over
//! the event `A = 0` and `c, d` over `A = 1`. For statistical parity and
//! equal opportunity the denominators do not depend on the model ("proper"
//! metrics), which lets the pooled metric be written as a weighted sum of
//! per-client components `F_k = a_k/b - c_k/d` built from client summaries.

mod constructions;
mod decomposition;
pub mod fixtures;
mod gradient;
mod penalty;
mod stats;

pub use constructions::{
    check_theorem2_condition, theorem1_converse_construction, theorem1_forward_construction,
    THEOREM2_TOLERANCE,
};
pub use decomposition::{
    check_theorem3_bound, dh_coefficient, global_fairness, pooled_stats, FairnessReport,
    HeterogeneityReport, Theorem3Check,
};
pub use gradient::{component_value, fairness_component_gradient};
pub use penalty::{sign_update, PenaltyConfig, Regularizer};
pub use stats::{fairness_stats, local_fairness, FairnessStats, MetricKind, StatsMode};
