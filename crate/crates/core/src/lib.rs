//! Edmonds' weighted matching algorithm with per-cardinality certificates.

#![allow(clippy::result_large_err)]

pub mod certificates;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod rational;
pub mod reductions;
pub mod scenario;
pub mod schema;

pub use certificates::{
    accumulate_duals, check_cardinality_certificate, check_cut_feasibility, transform_duals, verify_claims, verify_run,
    CardinalityCertificate, Claim, ConstraintId, Verdict, Violation,
};
pub use engine::{solve, DualPolicy, DualState, EngineError, Mode, RunResult, Snapshot, Status};
pub use graph::{normalize_weights, parse_instance, Instance, Matching, NodeId};
pub use oracle::{min_weight_by_cardinality, OracleTable};
pub use rational::Rational;
pub use reductions::{build_auxiliary_completion, build_doubled_graph, check_perfect_certificate, AuxiliaryCompletion};
pub use scenario::{compare_dual_policies, three_forest_instance, ScenarioReport};
