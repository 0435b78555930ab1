//! Graph constructions that re-derive per-cardinality optimality.
//!
//! The auxiliary completion attaches a fresh node `u_i` (id `n + i - 1`,
//! i.e. `n + i` 1-based) for every exposed node of a snapshot, so that the
//! snapshot becomes a perfect matching of equal weight in a larger graph
//! and can be certified by the ordinary perfect-matching conditions.
//!
//! The doubled graph (mirror of `v` has id `n + v`) turns minimum-weight
//! matching into minimum-weight perfect matching.

use num_traits::{Signed, Zero};

use crate::certificates::{accumulate_duals, check_cut_feasibility, ConstraintId, Verdict, Witness};
use crate::engine::{solve, DualPolicy, DualState, EngineError, Mode, Snapshot, Status};
use crate::graph::{normalize_weights, Instance, Matching, NodeId};
use crate::rational::{Display as R, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxiliaryCompletion {
    pub aux_instance: Instance,
    pub extended_matching: Matching,
    pub lifted_duals: DualState,
    /// Exposed nodes v_1 < v_2 < ... of the snapshot; v_i is matched to u_i.
    pub exposed: Vec<NodeId>,
}

impl AuxiliaryCompletion {
    pub fn original_node_count(&self) -> usize {
        self.aux_instance.node_count() - self.exposed.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompletionError {
    #[error("exposed node {} has accumulated dual {} below the maximum {}", node + 1, R(pi_star), R(pi_star_max))]
    ExposedBelowMax {
        node: NodeId,
        pi_star: Rational,
        pi_star_max: Rational,
    },
    #[error("snapshot duals cover {duals} nodes, instance has {nodes}")]
    SizeMismatch { duals: usize, nodes: usize },
}

/// Every exposed node must carry the maximal accumulated dual, otherwise
/// the edge {v_i, u_i} cannot be tight.
pub fn build_auxiliary_completion(
    inst: &Instance,
    snapshot: &Snapshot,
) -> Result<AuxiliaryCompletion, CompletionError> {
    let n = inst.node_count();
    if snapshot.duals.node_count() != n {
        return Err(CompletionError::SizeMismatch {
            duals: snapshot.duals.node_count(),
            nodes: n,
        });
    }
    let acc = accumulate_duals(&snapshot.duals);
    let exposed: Vec<NodeId> = (0..n).filter(|&v| !snapshot.matching.covers(v)).collect();
    if let Some(&v) = exposed.iter().find(|&&v| acc.pi_star[v] != acc.pi_star_max) {
        return Err(CompletionError::ExposedBelowMax {
            node: v,
            pi_star: acc.pi_star[v].clone(),
            pi_star_max: acc.pi_star_max,
        });
    }

    let k = exposed.len();
    let mut edges: Vec<(NodeId, NodeId, Rational)> =
        inst.edges().iter().map(|e| (e.u, e.v, e.weight.clone())).collect();
    for i in 0..k {
        edges.extend((0..n).map(|v| (v, n + i, Rational::zero())));
    }
    let aux_instance = Instance::new(n + k, edges).expect("fresh nodes add no duplicates");

    let mut extended_matching = snapshot.matching.clone();
    for (i, &v) in exposed.iter().enumerate() {
        extended_matching.insert(v, n + i).expect("v is exposed");
    }

    let mut lifted_duals = snapshot.duals.clone();
    lifted_duals.singletons.extend(std::iter::repeat_n(-acc.pi_star_max, k));

    Ok(AuxiliaryCompletion {
        aux_instance,
        extended_matching,
        lifted_duals,
        exposed,
    })
}

pub type PerfectVerdict = Verdict;

/// Feasibility of π′ plus complementary slackness for the perfect-matching
/// LP in cut form on the auxiliary instance.
pub fn check_perfect_certificate(comp: &AuxiliaryCompletion) -> PerfectVerdict {
    let inst = &comp.aux_instance;
    let m = &comp.extended_matching;
    let n = inst.node_count();
    if inst.check_matching(m).is_err() || 2 * m.len() != n {
        let mut verdict = Verdict::default();
        let covered = Rational::from_integer((2 * m.len()).into());
        verdict.push(ConstraintId::Structure, Witness::None, covered, Rational::from_integer(n.into()));
        return verdict;
    }

    let mut verdict = check_cut_feasibility(inst, &comp.lifted_duals);
    for &(u, v) in m.pairs() {
        let load = comp.lifted_duals.cut_sum(u, v);
        let w = inst.weight(u, v).expect("matching checked").clone();
        if load != w {
            verdict.push(ConstraintId::MatchedTight, Witness::Edge(u, v), load, w);
        }
    }
    for b in &comp.lifted_duals.blossoms {
        if b.pi.is_positive() {
            let leaving = m.count_leaving(&b.nodes);
            if leaving != 1 {
                verdict.push(
                    ConstraintId::CutOnce,
                    Witness::Set(b.nodes.clone()),
                    Rational::from_integer(leaving.into()),
                    Rational::from_integer(1.into()),
                );
            }
        }
    }
    verdict
}

/// Two copies of the graph joined by a zero-weight edge {v, n + v} per node.
/// Mirror edges keep the original weights, so the minimum perfect matching
/// weighs exactly twice the minimum matching.
pub fn build_doubled_graph(inst: &Instance) -> Instance {
    let n = inst.node_count();
    let mut edges: Vec<(NodeId, NodeId, Rational)> =
        inst.edges().iter().map(|e| (e.u, e.v, e.weight.clone())).collect();
    edges.extend(inst.edges().iter().map(|e| (n + e.u, n + e.v, e.weight.clone())));
    edges.extend((0..n).map(|v| (v, n + v, Rational::zero())));
    Instance::new(2 * n, edges).expect("mirror of a valid instance is valid")
}

/// Minimum-weight perfect matching via the engine in perfect mode, after
/// shifting weights to be nonnegative. `None` when no perfect matching exists.
pub fn min_perfect_matching(inst: &Instance) -> Result<Option<(Matching, Rational)>, EngineError> {
    let (shifted, record) = normalize_weights(inst);
    let run = solve(&shifted, Mode::Perfect, &DualPolicy::Uniform, Rational::zero())?;
    if run.status != Status::PerfectFound {
        return Ok(None);
    }
    let last = run.final_snapshot();
    Ok(Some((
        last.matching.clone(),
        record.original_weight(&last.weight, last.cardinality),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BlossomDual;
    use crate::graph::matching_weight;
    use crate::rational::{half, int};
    use std::collections::BTreeSet;

    fn p4() -> Instance {
        Instance::new(4, [(0, 1, int(5)), (1, 2, int(1)), (2, 3, int(5))]).unwrap()
    }

    fn p4_k1() -> Snapshot {
        Snapshot {
            cardinality: 1,
            matching: Matching::from_pairs([(1, 2)]).unwrap(),
            duals: DualState::initial(4, half()),
            weight: int(1),
        }
    }

    #[test]
    fn p4_completion() {
        let comp = build_auxiliary_completion(&p4(), &p4_k1()).unwrap();
        assert_eq!(comp.aux_instance.node_count(), 6);
        assert_eq!(comp.aux_instance.edge_count(), 3 + 8);
        assert_eq!(comp.exposed, vec![0, 3]);
        assert_eq!(
            comp.extended_matching,
            Matching::from_pairs([(1, 2), (0, 4), (3, 5)]).unwrap()
        );
        assert_eq!(matching_weight(&comp.aux_instance, &comp.extended_matching).unwrap(), int(1));
        assert_eq!(comp.lifted_duals.singletons[4..], [-half(), -half()]);
        assert!(check_perfect_certificate(&comp).pass());
    }

    #[test]
    fn perturbed_lifted_dual_fails() {
        let mut comp = build_auxiliary_completion(&p4(), &p4_k1()).unwrap();
        comp.lifted_duals.singletons[4] = int(0);
        let v = check_perfect_certificate(&comp);
        assert!(v
            .violations
            .iter()
            .any(|x| x.constraint == ConstraintId::MatchedTight && x.witness == Witness::Edge(0, 4)));
    }

    #[test]
    fn perfect_snapshot_completes_to_itself() {
        let snap = Snapshot {
            cardinality: 2,
            matching: Matching::from_pairs([(0, 1), (2, 3)]).unwrap(),
            duals: DualState::initial(4, int(0)),
            weight: int(10),
        };
        let comp = build_auxiliary_completion(&p4(), &snap).unwrap();
        assert_eq!(comp.aux_instance, p4());
        assert_eq!(comp.extended_matching, snap.matching);
    }

    #[test]
    fn unequal_exposed_duals_are_refused() {
        let mut snap = p4_k1();
        snap.duals.singletons[3] = int(0);
        assert!(matches!(
            build_auxiliary_completion(&p4(), &snap),
            Err(CompletionError::ExposedBelowMax { node: 3, .. })
        ));
    }

    #[test]
    fn cut_once_is_checked() {
        // Triangle blossom {0,1,2} with positive dual; matching leaves it twice.
        let inst = Instance::new(
            6,
            [(0, 1, int(2)), (1, 2, int(2)), (0, 2, int(2)), (0, 3, int(2)), (1, 4, int(2)), (2, 5, int(2))],
        )
        .unwrap();
        let mut duals = DualState::initial(6, int(0));
        duals.blossoms.push(BlossomDual { nodes: BTreeSet::from([0, 1, 2]), pi: int(1) });
        let comp = AuxiliaryCompletion {
            aux_instance: inst,
            extended_matching: Matching::from_pairs([(0, 3), (1, 4), (2, 5)]).unwrap(),
            lifted_duals: duals,
            exposed: vec![],
        };
        let v = check_perfect_certificate(&comp);
        assert!(v.violations.iter().any(|x| x.constraint == ConstraintId::CutOnce));
    }

    #[test]
    fn non_perfect_input_is_structural_failure() {
        let comp = AuxiliaryCompletion {
            aux_instance: p4(),
            extended_matching: Matching::from_pairs([(1, 2)]).unwrap(),
            lifted_duals: DualState::initial(4, int(0)),
            exposed: vec![],
        };
        assert_eq!(check_perfect_certificate(&comp).violations[0].constraint, ConstraintId::Structure);
    }

    #[test]
    fn doubled_single_edge() {
        let inst = Instance::new(2, [(0, 1, int(3))]).unwrap();
        let d = build_doubled_graph(&inst);
        assert_eq!(d.node_count(), 4);
        let edges: Vec<_> = d.edges().iter().map(|e| (e.u, e.v, e.weight.clone())).collect();
        assert_eq!(
            edges,
            vec![(0, 1, int(3)), (2, 3, int(3)), (0, 2, int(0)), (1, 3, int(0))]
        );
        assert_eq!(min_perfect_matching(&d).unwrap().unwrap().1, int(0));

        let neg = Instance::new(2, [(0, 1, int(-5))]).unwrap();
        assert_eq!(min_perfect_matching(&build_doubled_graph(&neg)).unwrap().unwrap().1, int(-10));
        assert_eq!(min_perfect_matching(&build_doubled_graph(&p4())).unwrap().unwrap().1, int(0));
    }

    #[test]
    fn min_perfect_on_odd_graph_is_none() {
        let inst = Instance::new(3, [(0, 1, int(1)), (1, 2, int(1))]).unwrap();
        assert_eq!(min_perfect_matching(&inst).unwrap(), None);
    }
}
