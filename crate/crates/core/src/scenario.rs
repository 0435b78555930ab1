//! The three-forest counterexample: moving the duals of different trees by
//! different amounts breaks cardinality optimality.
//!
//! Node ids (0-based): a1, a2, a3 = 0, 1, 2; b1, b2, b3 = 3, 4, 5;
//! c1, c2, c3 = 6, 7, 8.

use num_traits::Zero;

use crate::engine::{solve, DualPolicy, EngineError, Mode, RunResult};
use crate::graph::{normalize_weights, Instance};
use crate::oracle::{min_weight_by_cardinality, OracleError, OracleTable, DEFAULT_NODE_LIMIT};
use crate::rational::{int, Rational};

pub const THREE_FOREST_LABELS: [&str; 9] = ["a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"];

/// Three paths a_i - b_i - c_i of weight 0, with cross edges
/// {a1,a2} = 3, {a2,a3} = 5, {a1,a3} = 4.
pub fn three_forest_instance() -> Instance {
    let mut edges = Vec::new();
    for i in 0..3 {
        edges.push((i, 3 + i, int(0)));
        edges.push((3 + i, 6 + i, int(0)));
    }
    edges.push((0, 1, int(3)));
    edges.push((1, 2, int(5)));
    edges.push((0, 2, int(4)));
    Instance::new(9, edges).expect("static instance")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub k: usize,
    pub scripted: Rational,
    pub oracle: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub uniform: Vec<(usize, Rational)>,
    pub scripted: Result<Vec<(usize, Rational)>, EngineError>,
    pub oracle: OracleTable,
    /// First cardinality where the scripted run is heavier than the optimum.
    pub divergence: Option<Divergence>,
    pub uniform_run: RunResult,
    pub scripted_run: Option<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("uniform run failed: {0}")]
    Uniform(EngineError),
}

/// Runs the uniform policy and a policy whose first dual update uses
/// `amounts` (one per tree, ascending root id), and compares both with the
/// oracle. Weights are reported on the input scale.
pub fn compare_dual_policies(inst: &Instance, amounts: &[Rational]) -> Result<ScenarioReport, ScenarioError> {
    let oracle = min_weight_by_cardinality(inst, DEFAULT_NODE_LIMIT)?;
    let (shifted, record) = normalize_weights(inst);
    let weights = |run: &RunResult| -> Vec<(usize, Rational)> {
        run.snapshots
            .iter()
            .map(|s| (s.cardinality, record.original_weight(&s.weight, s.cardinality)))
            .collect()
    };

    let uniform_run =
        solve(&shifted, Mode::Maximum, &DualPolicy::Uniform, Rational::zero()).map_err(ScenarioError::Uniform)?;
    let policy = DualPolicy::Scripted(vec![amounts.to_vec()]);
    let scripted_run = solve(&shifted, Mode::Maximum, &policy, Rational::zero());
    let scripted = scripted_run.as_ref().map(weights).map_err(Clone::clone);

    let divergence = scripted.as_ref().ok().and_then(|list| {
        list.iter().find_map(|(k, w)| {
            let best = oracle.min_weight(*k)?;
            (w > best).then(|| Divergence {
                k: *k,
                scripted: w.clone(),
                oracle: best.clone(),
            })
        })
    });
    Ok(ScenarioReport {
        uniform: weights(&uniform_run),
        scripted,
        oracle,
        divergence,
        uniform_run,
        scripted_run: scripted_run.ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::verify_run;

    fn weight_at(list: &[(usize, Rational)], k: usize) -> Rational {
        list.iter().find(|(j, _)| *j == k).unwrap().1.clone()
    }

    #[test]
    fn three_forest_shape() {
        let inst = three_forest_instance();
        assert_eq!(inst.node_count(), 9);
        assert_eq!(inst.edge_count(), 9);
        let cross: Vec<_> = inst.edges()[6..].iter().map(|e| e.weight.clone()).collect();
        assert_eq!(cross, vec![int(3), int(5), int(4)]);
        assert!(inst.edges()[..6].iter().all(|e| e.weight.is_zero()));
        let table = min_weight_by_cardinality(&inst, 16).unwrap();
        assert_eq!(table.nu, 4);
        assert_eq!(table.min_weight(4), Some(&int(3)));
    }

    #[test]
    fn unequal_amounts_diverge_at_four() {
        let inst = three_forest_instance();
        let report = compare_dual_policies(&inst, &[int(1), int(1), int(3)]).unwrap();
        let scripted = report.scripted.as_ref().unwrap();
        assert_eq!(weight_at(&report.uniform, 4), int(3));
        assert_eq!(weight_at(scripted, 4), int(4));
        assert_eq!(
            report.divergence,
            Some(Divergence { k: 4, scripted: int(4), oracle: int(3) })
        );
        assert!(verify_run(&inst, &report.uniform_run).pass());
        let verdict = verify_run(&inst, report.scripted_run.as_ref().unwrap());
        assert!(!verdict.pass());
        assert!(verdict.violations.iter().all(|v| v.k == Some(4)));
    }

    #[test]
    fn equal_amounts_do_not_diverge() {
        let report = compare_dual_policies(&three_forest_instance(), &vec![int(1); 3]).unwrap();
        assert_eq!(report.divergence, None);
        assert_eq!(weight_at(report.scripted.as_ref().unwrap(), 4), int(3));
    }

    #[test]
    fn single_tree_cannot_diverge() {
        let p4 = Instance::new(4, [(0, 1, int(5)), (1, 2, int(1)), (2, 3, int(5))]).unwrap();
        let report = compare_dual_policies(&p4, &[int(1)]).unwrap();
        assert_eq!(report.divergence, None);
    }

    #[test]
    fn infeasible_script_is_reported() {
        let report = compare_dual_policies(&three_forest_instance(), &[int(10), int(1), int(1)]).unwrap();
        assert!(report.scripted.is_err());
        assert_eq!(report.divergence, None);
        assert_eq!(weight_at(&report.uniform, 4), int(3));
    }
}
