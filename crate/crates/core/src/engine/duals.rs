use std::collections::BTreeSet;

use num_traits::Zero;

use crate::graph::NodeId;
use crate::rational::Rational;

/// A non-singleton member of the laminar family with its dual value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlossomDual {
    pub nodes: BTreeSet<NodeId>,
    pub pi: Rational,
}

/// Laminar family of odd node sets with their dual values.
///
/// Singletons are always members and are stored densely; larger sets are
/// listed in `blossoms`. Sets absent from the family have dual value 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualState {
    pub singletons: Vec<Rational>,
    pub blossoms: Vec<BlossomDual>,
    /// Initial value given to every singleton.
    pub beta: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DualStructureError {
    #[error("set {nodes:?} has even cardinality")]
    EvenSet { nodes: Vec<NodeId> },
    #[error("set {nodes:?} mentions a node outside 0..{node_count}")]
    NodeOutOfRange { nodes: Vec<NodeId>, node_count: usize },
    #[error("sets {a:?} and {b:?} cross")]
    NotLaminar { a: Vec<NodeId>, b: Vec<NodeId> },
    #[error("set {nodes:?} listed twice")]
    Duplicate { nodes: Vec<NodeId> },
}

impl DualState {
    pub fn initial(node_count: usize, beta: Rational) -> Self {
        DualState {
            singletons: vec![beta.clone(); node_count],
            blossoms: Vec::new(),
            beta,
        }
    }

    pub fn node_count(&self) -> usize {
        self.singletons.len()
    }

    /// Σ π(U) over members U with exactly one endpoint of {u, v} inside.
    pub fn cut_sum(&self, u: NodeId, v: NodeId) -> Rational {
        let mut total = &self.singletons[u] + &self.singletons[v];
        for b in &self.blossoms {
            if b.nodes.contains(&u) != b.nodes.contains(&v) {
                total += &b.pi;
            }
        }
        total
    }

    /// Checks laminarity, odd cardinality and node range.
    pub fn validate(&self) -> Result<(), DualStructureError> {
        let n = self.node_count();
        for (i, a) in self.blossoms.iter().enumerate() {
            let list = || a.nodes.iter().copied().collect::<Vec<_>>();
            if a.nodes.len() % 2 == 0 {
                return Err(DualStructureError::EvenSet { nodes: list() });
            }
            if a.nodes.iter().any(|&v| v >= n) {
                return Err(DualStructureError::NodeOutOfRange {
                    nodes: list(),
                    node_count: n,
                });
            }
            for b in &self.blossoms[..i] {
                if a.nodes == b.nodes {
                    return Err(DualStructureError::Duplicate { nodes: list() });
                }
                let disjoint = a.nodes.is_disjoint(&b.nodes);
                if !disjoint && !a.nodes.is_subset(&b.nodes) && !b.nodes.is_subset(&a.nodes) {
                    return Err(DualStructureError::NotLaminar {
                        a: list(),
                        b: b.nodes.iter().copied().collect(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Inclusion-maximal members; they partition the node set.
    pub fn maximal_sets(&self) -> Vec<BTreeSet<NodeId>> {
        let mut out: Vec<BTreeSet<NodeId>> = self
            .blossoms
            .iter()
            .filter(|a| {
                !self
                    .blossoms
                    .iter()
                    .any(|b| b.nodes.len() > a.nodes.len() && a.nodes.is_subset(&b.nodes))
            })
            .map(|a| a.nodes.clone())
            .collect();
        let covered: BTreeSet<NodeId> = out.iter().flatten().copied().collect();
        out.extend(
            (0..self.node_count())
                .filter(|v| !covered.contains(v))
                .map(|v| BTreeSet::from([v])),
        );
        out.sort_by_key(|s| *s.iter().next().unwrap());
        out
    }

    /// Blossoms with nonzero dual value.
    pub fn support(&self) -> impl Iterator<Item = &BlossomDual> {
        self.blossoms.iter().filter(|b| !b.pi.is_zero())
    }

    /// Every dual value, singletons first.
    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.singletons.iter().chain(self.blossoms.iter().map(|b| &b.pi))
    }
}
