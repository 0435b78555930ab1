//! Brute-force ground truth: the minimum weight of a matching of every
//! cardinality, found by enumerating all matchings.
//!
//! Deliberately naive. The recursion takes the lowest undecided node and
//! either leaves it exposed or matches it to a later free neighbour, so
//! each matching is visited exactly once.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::graph::{EdgeId, Instance, Matching, NodeId};
use crate::rational::Rational;

pub const DEFAULT_NODE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityOptimum {
    pub k: usize,
    pub min_weight: Rational,
    /// Among optimal matchings, the one whose sorted edge-id list is
    /// lexicographically smallest.
    pub witness: Matching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTable {
    /// Matching number ν(G).
    pub nu: usize,
    /// Entry `k` holds the optimum for cardinality `k`, for k = 0..=nu.
    pub by_cardinality: Vec<CardinalityOptimum>,
}

impl OracleTable {
    pub fn min_weight(&self, k: usize) -> Option<&Rational> {
        self.by_cardinality.get(k).map(|c| &c.min_weight)
    }

    /// Minimum over all cardinalities, i.e. the minimum-weight matching value.
    pub fn overall_minimum(&self) -> &Rational {
        self.by_cardinality
            .iter()
            .map(|c| &c.min_weight)
            .min()
            .expect("k = 0 is always present")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance has {nodes} nodes, oracle budget is {limit}")]
    OverBudget { nodes: usize, limit: usize },
}

pub fn min_weight_by_cardinality(inst: &Instance, limit: usize) -> Result<OracleTable, OracleError> {
    let n = inst.node_count();
    if n > limit {
        return Err(OracleError::OverBudget { nodes: n, limit });
    }
    // Enumerate over integers: scale every weight by the common denominator.
    let scale = inst
        .edges()
        .iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.weight.denom()));
    let scaled: Vec<BigInt> = inst
        .edges()
        .iter()
        .map(|e| e.weight.numer() * (&scale / e.weight.denom()))
        .collect();
    let small: Option<Vec<i64>> = scaled
        .iter()
        .map(|w| w.to_i64().filter(|x| x.unsigned_abs() < 1 << 40))
        .collect();
    let best = match small {
        Some(weights) => enumerate(inst, &weights)
            .into_iter()
            .map(|(w, ids)| (BigInt::from(w), ids))
            .collect(),
        None => enumerate(inst, &scaled),
    };

    let by_cardinality: Vec<CardinalityOptimum> = best
        .into_iter()
        .enumerate()
        .map(|(k, (w, ids))| CardinalityOptimum {
            k,
            min_weight: Rational::new(w, scale.clone()),
            witness: Matching::from_pairs(ids.iter().map(|&id| inst.edge(id).key()))
                .expect("enumerated edge sets are matchings"),
        })
        .collect();
    Ok(OracleTable {
        nu: by_cardinality.len() - 1,
        by_cardinality,
    })
}

/// ν(G), the largest cardinality of a matching.
pub fn matching_number(inst: &Instance, limit: usize) -> Result<usize, OracleError> {
    min_weight_by_cardinality(inst, limit).map(|t| t.nu)
}

struct Search<'a, W> {
    weights: &'a [W],
    /// Forward neighbours `(u, edge)` with `u > v`, in edge order.
    forward: Vec<Vec<(NodeId, EdgeId)>>,
    used: Vec<bool>,
    chosen: Vec<EdgeId>,
    best: Vec<Option<(W, Vec<EdgeId>)>>,
}

fn enumerate<W>(inst: &Instance, weights: &[W]) -> Vec<(W, Vec<EdgeId>)>
where
    W: Clone + Ord + Zero + for<'w> Add<&'w W, Output = W>,
{
    let n = inst.node_count();
    let mut forward = vec![Vec::new(); n];
    for (id, e) in inst.edges().iter().enumerate() {
        let (lo, hi) = e.key();
        forward[lo].push((hi, id));
    }
    let mut search = Search {
        weights,
        forward,
        used: vec![false; n],
        chosen: Vec::new(),
        best: vec![None; n / 2 + 1],
    };
    search.visit(0, W::zero());
    search.best.into_iter().map_while(|b| b).collect()
}

impl<W> Search<'_, W>
where
    W: Clone + Ord + Zero + for<'w> Add<&'w W, Output = W>,
{
    fn visit(&mut self, from: NodeId, sum: W) {
        let n = self.used.len();
        let Some(v) = (from..n).find(|&v| !self.used[v]) else {
            self.record(sum);
            return;
        };
        self.used[v] = true;
        self.visit(v + 1, sum.clone());
        for i in 0..self.forward[v].len() {
            let (u, id) = self.forward[v][i];
            if self.used[u] {
                continue;
            }
            self.used[u] = true;
            self.chosen.push(id);
            self.visit(v + 1, sum.clone() + &self.weights[id]);
            self.chosen.pop();
            self.used[u] = false;
        }
        self.used[v] = false;
    }

    fn record(&mut self, sum: W) {
        let slot = &mut self.best[self.chosen.len()];
        let better = match slot {
            None => true,
            Some((w, ids)) => {
                sum < *w || (sum == *w && {
                    let mut mine = self.chosen.clone();
                    mine.sort_unstable();
                    mine < *ids
                })
            }
        };
        if better {
            let mut ids = self.chosen.clone();
            ids.sort_unstable();
            *slot = Some((sum, ids));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::matching_weight;
    use crate::rational::{int, ratio};

    type Row = (usize, Rational, Vec<(NodeId, NodeId)>);

    fn table(inst: &Instance) -> Vec<Row> {
        min_weight_by_cardinality(inst, DEFAULT_NODE_LIMIT)
            .unwrap()
            .by_cardinality
            .into_iter()
            .map(|c| (c.k, c.min_weight, c.witness.pairs().copied().collect()))
            .collect()
    }

    #[test]
    fn triangle_table() {
        let inst = Instance::new(3, [(0, 1, int(1)), (0, 2, int(2)), (1, 2, int(3))]).unwrap();
        assert_eq!(table(&inst), vec![(0, int(0), vec![]), (1, int(1), vec![(0, 1)])]);
        assert_eq!(matching_number(&inst, 16).unwrap(), 1);
    }

    #[test]
    fn p4_table() {
        let inst = Instance::new(4, [(0, 1, int(5)), (1, 2, int(1)), (2, 3, int(5))]).unwrap();
        assert_eq!(
            table(&inst),
            vec![
                (0, int(0), vec![]),
                (1, int(1), vec![(1, 2)]),
                (2, int(10), vec![(0, 1), (2, 3)]),
            ]
        );
        assert_eq!(matching_number(&inst, 16).unwrap(), 2);
    }

    #[test]
    fn edgeless_graph_has_matching_number_zero() {
        let inst = Instance::new(5, []).unwrap();
        assert_eq!(matching_number(&inst, 16).unwrap(), 0);
    }

    #[test]
    fn over_budget_is_refused() {
        let inst = Instance::new(17, []).unwrap();
        assert_eq!(
            min_weight_by_cardinality(&inst, 16),
            Err(OracleError::OverBudget { nodes: 17, limit: 16 })
        );
    }

    #[test]
    fn ties_pick_the_smallest_edge_ids() {
        // Square: both perfect matchings weigh 2.
        let inst = Instance::new(
            4,
            [(0, 1, int(1)), (1, 2, int(1)), (2, 3, int(1)), (3, 0, int(1))],
        )
        .unwrap();
        let t = table(&inst);
        assert_eq!(t[1].2, vec![(0, 1)]);
        assert_eq!(t[2].2, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn fractional_and_huge_weights_are_exact() {
        let inst = Instance::new(3, [(0, 1, ratio(1, 3)), (1, 2, ratio(1, 6))]).unwrap();
        assert_eq!(table(&inst)[1].1, ratio(1, 6));

        let big = crate::rational::parse_rational("123456789012345678901234567890").unwrap();
        let inst = Instance::new(4, [(0, 1, big.clone()), (2, 3, big.clone())]).unwrap();
        let t = table(&inst);
        assert_eq!(t[2].1, &big + &big);
    }

    #[test]
    fn witnesses_match_their_weights() {
        let inst = Instance::new(
            6,
            [
                (0, 1, int(4)),
                (1, 2, int(-2)),
                (2, 3, int(7)),
                (3, 4, int(1)),
                (4, 5, int(3)),
                (5, 0, int(0)),
                (0, 3, int(2)),
            ],
        )
        .unwrap();
        let t = min_weight_by_cardinality(&inst, 16).unwrap();
        assert_eq!(t.nu, 3);
        for c in &t.by_cardinality {
            assert_eq!(c.witness.len(), c.k);
            assert_eq!(matching_weight(&inst, &c.witness).unwrap(), c.min_weight);
        }
    }
}
