//! Edmonds' primal-dual blossom algorithm for minimum-weight perfect
//! matching, instrumented to record every intermediate matching.
//!
//! [`solve`] starts from the empty matching and π = β on singletons. It
//! alternates primal steps (augment along a tight path between two exposed
//! view-nodes, or shrink an odd cycle) with dual updates, and emits a
//! [`Snapshot`] holding the expanded matching and a frozen copy of the
//! duals after each augmentation. A run stops at a perfect matching or when
//! the dual change is unbounded, in which case the final matching has
//! maximum cardinality.

mod duals;
mod state;

use std::collections::BTreeSet;

pub use duals::{BlossomDual, DualState, DualStructureError};
pub use state::{Alpha, DualUpdate, Engine, Growth, Label, LabeledNode, ShrunkenView};

use crate::graph::{Instance, Matching, NodeId};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Perfect,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    PerfectFound,
    NoPerfectMatching,
}

/// How much each tree's duals move in a dual update.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DualPolicy {
    /// Every tree moves by the same maximal α.
    #[default]
    Uniform,
    /// Phase `i` uses `phases[i]`, one amount per tree in ascending root
    /// order. Phases past the end of the script fall back to uniform.
    Scripted(Vec<Vec<Rational>>),
}

impl DualPolicy {
    fn amounts_for(&self, phase: usize) -> Option<&[Rational]> {
        match self {
            DualPolicy::Uniform => None,
            DualPolicy::Scripted(phases) => phases.get(phase).map(Vec::as_slice),
        }
    }
}

/// The constraint that limited α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// π(U) of an odd-labeled blossom.
    OddBlossom { nodes: Vec<NodeId> },
    /// Slack of an edge from an even view-node to an unlabeled one.
    EvenFree { u: NodeId, v: NodeId },
    /// Half the slack of an edge between two even view-nodes.
    EvenEven { u: NodeId, v: NodeId },
}

/// A violated dual constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    NegativeBlossom { nodes: Vec<NodeId>, pi: Rational },
    EdgeOverloaded { u: NodeId, v: NodeId, load: Rational, weight: Rational },
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use crate::rational::Display as R;
        match self {
            Infeasibility::NegativeBlossom { nodes, pi } => {
                write!(f, "blossom {nodes:?} would get negative dual {}", R(pi))
            }
            Infeasibility::EdgeOverloaded { u, v, load, weight } => write!(
                f,
                "edge {{{u}, {v}}} would carry {} > weight {}",
                R(load),
                R(weight)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("edge {{{u}, {v}}} has negative weight; normalize weights first")]
    NegativeWeight { u: NodeId, v: NodeId, weight: Rational },
    #[error("initial duals infeasible: {0}")]
    InfeasibleInitialDuals(Infeasibility),
    #[error("dual update infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error("scripted phase {phase}: {source}")]
    Script {
        phase: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error("{amounts} amounts given for {trees} trees")]
    TreeCountMismatch { trees: usize, amounts: usize },
    #[error("negative dual amount {0}")]
    NegativeAmount(Rational),
    #[error("forest is not fully grown")]
    ForestIncomplete,
    #[error("forest must be grown first")]
    StaleForest,
    #[error("edge {{{u}, {v}}} does not close a blossom; it joins two trees")]
    WalkIsPath { u: NodeId, v: NodeId },
    #[error("edge {{{u}, {v}}} is not a tight edge between even view-nodes")]
    NotAnEventEdge { u: NodeId, v: NodeId },
    #[error("no progress after {0} steps")]
    StepLimit(usize),
}

/// A matching recorded right after an augmentation (or the initial empty one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub cardinality: usize,
    pub matching: Matching,
    pub duals: DualState,
    pub weight: Rational,
}

/// One dual-update phase, recorded after deshrinking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    /// `(root, amount)` per tree.
    pub amounts: Vec<(NodeId, Rational)>,
    /// The uniform bound, when the phase was not scripted.
    pub binding: Option<Binding>,
    pub deshrunk: Vec<BTreeSet<NodeId>>,
    pub exposed: Vec<NodeId>,
    pub duals: DualState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub mode: Mode,
    pub status: Status,
    /// Ordered by cardinality 0, 1, ..., K.
    pub snapshots: Vec<Snapshot>,
    pub phases: Vec<PhaseRecord>,
}

impl RunResult {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("runs always record k = 0")
    }

    pub fn final_index(&self) -> usize {
        self.snapshots.len() - 1
    }

    /// A perfect-mode run that proved no perfect matching exists.
    pub fn is_infeasible(&self) -> bool {
        self.mode == Mode::Perfect && self.status == Status::NoPerfectMatching
    }
}

/// Runs the algorithm to completion on an instance with nonnegative weights.
pub fn solve(
    inst: &Instance,
    mode: Mode,
    policy: &DualPolicy,
    beta: Rational,
) -> Result<RunResult, EngineError> {
    let mut engine = Engine::new(inst, beta)?;
    let snapshot = |engine: &Engine| Snapshot {
        cardinality: engine.cardinality(),
        matching: engine.matching(),
        duals: engine.dual_state(),
        weight: engine.weight(),
    };
    let mut snapshots = vec![snapshot(&engine)];
    let mut phases: Vec<PhaseRecord> = Vec::new();
    let n = inst.node_count();
    let limit = 16 * (n + 1).pow(3) + 1000;
    let mut steps = 0;

    let status = loop {
        if engine.exposed_nodes().is_empty() {
            break Status::PerfectFound;
        }
        steps += 1;
        if steps > limit {
            return Err(EngineError::StepLimit(limit));
        }
        match engine.grow_forest() {
            Growth::Augment { edge } => {
                engine.augment(edge)?;
                snapshots.push(snapshot(&engine));
            }
            Growth::Blossom { edge } => engine.shrink_blossom(edge)?,
            Growth::Complete => {
                let Alpha::Bounded { value, binding } = engine.compute_alpha()? else {
                    break Status::NoPerfectMatching;
                };
                let phase = phases.len();
                let (amounts, binding) = match policy.amounts_for(phase) {
                    Some(script) => (script.to_vec(), None),
                    None => (vec![value; engine.trees().len()], Some(binding)),
                };
                let update = engine.apply_dual_update(&amounts).map_err(|e| {
                    if binding.is_none() {
                        EngineError::Script {
                            phase,
                            source: Box::new(e),
                        }
                    } else {
                        e
                    }
                })?;
                phases.push(PhaseRecord {
                    amounts: update.amounts,
                    binding,
                    deshrunk: update.deshrunk,
                    exposed: engine.exposed_nodes(),
                    duals: engine.dual_state(),
                });
            }
        }
    };
    Ok(RunResult {
        mode,
        status,
        snapshots,
        phases,
    })
}
