//! Optimality certificates for matchings of a fixed cardinality.
//!
//! The duals π of the algorithm live in the cut formulation; they are
//! mapped to a solution (y, z, γ) of the dual of
//!
//! ```text
//! min w·x  s.t.  x ≥ 0,  x(δ(v)) ≤ 1,  x(E[U]) ≤ (|U|-1)/2 for odd U,  x(E) = k
//! ```
//!
//! and checked by feasibility plus complementary slackness, all in exact
//! arithmetic. Nothing here solves an LP.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::engine::{DualState, RunResult};
use crate::graph::{alternating_path_difference, matching_weight, DifferenceKind, Instance, Matching, NodeId};
use crate::rational::{Display as R, Rational};

/// Accumulated duals π*(v) = Σ_{U ∋ v} π(U) and their maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualAccumulation {
    pub pi_star: Vec<Rational>,
    pub pi_star_max: Rational,
}

pub fn accumulate_duals(dual: &DualState) -> DualAccumulation {
    let mut pi_star = dual.singletons.clone();
    for b in &dual.blossoms {
        for &v in &b.nodes {
            pi_star[v] += &b.pi;
        }
    }
    let pi_star_max = pi_star.iter().max().cloned().unwrap_or_else(Rational::zero);
    DualAccumulation { pi_star, pi_star_max }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetValue {
    pub nodes: BTreeSet<NodeId>,
    pub value: Rational,
}

/// Dual solution (y, z, γ) for the cardinality-`k` matching LP. `z` is
/// sparse; absent odd sets have value 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityCertificate {
    pub k: usize,
    pub gamma: Rational,
    pub y: Vec<Rational>,
    pub z: Vec<SetValue>,
}

impl CardinalityCertificate {
    /// Σ_{U: both ends of {u,v} in U} z_U.
    fn inner_sum(&self, u: NodeId, v: NodeId) -> Rational {
        self.z
            .iter()
            .filter(|s| s.nodes.contains(&u) && s.nodes.contains(&v))
            .fold(Rational::zero(), |acc, s| acc + &s.value)
    }

    /// Left-hand side y_u + y_v + Σ z_U + γ of the edge constraint.
    pub fn edge_load(&self, u: NodeId, v: NodeId) -> Rational {
        &self.y[u] + &self.y[v] + self.inner_sum(u, v) + &self.gamma
    }

    /// Dual objective Σ y + Σ (|U|-1)/2 z_U + k γ.
    pub fn objective(&self) -> Rational {
        let mut total: Rational = self.y.iter().sum();
        for s in &self.z {
            total += &s.value * Rational::from_integer(((s.nodes.len() - 1) / 2).into());
        }
        total + &self.gamma * Rational::from_integer(self.k.into())
    }
}

/// γ = 2π*_max, y_v = π*(v) − π*_max, z_U = −2π(U) on non-singleton members.
pub fn transform_duals(dual: &DualState, k: usize) -> CardinalityCertificate {
    let acc = accumulate_duals(dual);
    let two = Rational::from_integer(2.into());
    CardinalityCertificate {
        k,
        gamma: &two * &acc.pi_star_max,
        y: acc.pi_star.iter().map(|p| p - &acc.pi_star_max).collect(),
        z: dual
            .blossoms
            .iter()
            .filter(|b| !b.pi.is_zero())
            .map(|b| SetValue {
                nodes: b.nodes.clone(),
                value: -(&two * &b.pi),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintId {
    /// π(U) ≥ 0 for |U| ≥ 3.
    BlossomNonnegative,
    /// Σ_{U: e ∈ δ(U)} π(U) ≤ w_e.
    EdgeCut,
    /// y_u + y_v + Σ_{U: e ∈ E[U]} z_U + γ ≤ w_e.
    EdgeCardinality,
    /// y ≤ 0.
    NodeNonpositive,
    /// z ≤ 0.
    SetNonpositive,
    /// x(E) = k for the primal matching.
    Cardinality,
    /// Matched edges must be tight.
    MatchedTight,
    /// y_v < 0 requires v to be matched.
    ExposedZero,
    /// z_U < 0 requires (|U|-1)/2 matched edges inside U.
    SetFull,
    /// π(U) > 0 requires exactly one matched edge leaving U.
    CutOnce,
    /// Consecutive snapshots must differ by a single path.
    SinglePath,
    /// Structural problems: invalid matching, wrong weight, broken family.
    Structure,
}

impl ConstraintId {
    pub fn as_str(self) -> &'static str {
        use ConstraintId::*;
        match self {
            BlossomNonnegative => "blossom-nonnegative",
            EdgeCut => "edge-cut",
            EdgeCardinality => "edge-cardinality",
            NodeNonpositive => "node-nonpositive",
            SetNonpositive => "set-nonpositive",
            Cardinality => "cardinality",
            MatchedTight => "matched-tight",
            ExposedZero => "exposed-zero",
            SetFull => "set-full",
            CutOnce => "cut-once",
            SinglePath => "single-path",
            Structure => "structure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Edge(NodeId, NodeId),
    Node(NodeId),
    Set(BTreeSet<NodeId>),
    /// Snapshot index, or pair of consecutive indices.
    Snapshot(usize),
    Snapshots(usize, usize),
    None,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Edge(u, v) => write!(f, "edge {{{}, {}}}", u + 1, v + 1),
            Witness::Node(v) => write!(f, "node {}", v + 1),
            Witness::Set(s) => {
                let ids: Vec<String> = s.iter().map(|v| (v + 1).to_string()).collect();
                write!(f, "set {{{}}}", ids.join(", "))
            }
            Witness::Snapshot(i) => write!(f, "snapshot {i}"),
            Witness::Snapshots(i, j) => write!(f, "snapshots {i}->{j}"),
            Witness::None => f.write_str("-"),
        }
    }
}

/// One failed check with the exact values compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub witness: Witness,
    pub lhs: Rational,
    pub rhs: Rational,
    /// Cardinality of the snapshot being checked, when applicable.
    pub k: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(k) = self.k {
            write!(f, "k={k}: ")?;
        }
        write!(
            f,
            "{} at {}: lhs {} vs rhs {}",
            self.constraint.as_str(),
            self.witness,
            R(&self.lhs),
            R(&self.rhs)
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, constraint: ConstraintId, witness: Witness, lhs: Rational, rhs: Rational) {
        self.violations.push(Violation {
            constraint,
            witness,
            lhs,
            rhs,
            k: None,
        });
    }

    fn absorb(&mut self, other: Verdict, k: usize) {
        self.violations.extend(other.violations.into_iter().map(|mut v| {
            v.k.get_or_insert(k);
            v
        }));
    }
}

fn count(n: usize) -> Rational {
    Rational::from_integer(n.into())
}

/// Checks π against π(U) ≥ 0 for |U| ≥ 3 and the edge cut constraints.
pub fn check_cut_feasibility(inst: &Instance, dual: &DualState) -> Verdict {
    let mut verdict = Verdict::default();
    if dual.validate().is_err() || dual.node_count() != inst.node_count() {
        verdict.push(ConstraintId::Structure, Witness::None, Rational::zero(), Rational::zero());
        return verdict;
    }
    for b in &dual.blossoms {
        if b.pi.is_negative() {
            verdict.push(
                ConstraintId::BlossomNonnegative,
                Witness::Set(b.nodes.clone()),
                b.pi.clone(),
                Rational::zero(),
            );
        }
    }
    for e in inst.edges() {
        let load = dual.cut_sum(e.u, e.v);
        if load > e.weight {
            verdict.push(ConstraintId::EdgeCut, Witness::Edge(e.u, e.v), load, e.weight.clone());
        }
    }
    verdict
}

/// Verifies that `cert` proves `m` minimum-weight among matchings with
/// `cert.k` edges: dual feasibility, x(E) = k, and complementary slackness.
pub fn check_cardinality_certificate(
    inst: &Instance,
    m: &Matching,
    cert: &CardinalityCertificate,
) -> Verdict {
    use ConstraintId::*;
    let mut verdict = Verdict::default();
    let n = inst.node_count();
    if cert.y.len() != n || inst.check_matching(m).is_err() {
        verdict.push(Structure, Witness::None, count(cert.y.len()), count(n));
        return verdict;
    }
    if m.len() != cert.k {
        verdict.push(Cardinality, Witness::None, count(m.len()), count(cert.k));
    }
    for e in inst.edges() {
        let load = cert.edge_load(e.u, e.v);
        if load > e.weight {
            verdict.push(EdgeCardinality, Witness::Edge(e.u, e.v), load, e.weight.clone());
        } else if m.contains(e.u, e.v) && load != e.weight {
            verdict.push(MatchedTight, Witness::Edge(e.u, e.v), load, e.weight.clone());
        }
    }
    for (v, y) in cert.y.iter().enumerate() {
        if y.is_positive() {
            verdict.push(NodeNonpositive, Witness::Node(v), y.clone(), Rational::zero());
        } else if y.is_negative() && !m.covers(v) {
            verdict.push(ExposedZero, Witness::Node(v), y.clone(), Rational::zero());
        }
    }
    for s in &cert.z {
        if s.nodes.len() % 2 == 0 || s.nodes.iter().any(|&v| v >= n) {
            verdict.push(Structure, Witness::Set(s.nodes.clone()), count(s.nodes.len()), Rational::zero());
            continue;
        }
        if s.value.is_positive() {
            verdict.push(SetNonpositive, Witness::Set(s.nodes.clone()), s.value.clone(), Rational::zero());
        } else if s.value.is_negative() {
            let inside = m.count_inside(&s.nodes);
            let full = (s.nodes.len() - 1) / 2;
            if inside != full {
                verdict.push(SetFull, Witness::Set(s.nodes.clone()), count(inside), count(full));
            }
        }
    }
    verdict
}

/// A claimed cardinality-optimal matching with its certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub matching: Matching,
    pub weight: Rational,
    pub certificate: CardinalityCertificate,
}

/// Checks a sequence of claims for cardinalities 0, 1, 2, ...: stated
/// weights, certificates, and that consecutive matchings differ by a single
/// alternating path.
pub fn verify_claims(inst: &Instance, claims: &[Claim]) -> Verdict {
    let mut verdict = Verdict::default();
    for (i, claim) in claims.iter().enumerate() {
        let k = claim.certificate.k;
        if k != i {
            verdict.push(ConstraintId::Structure, Witness::Snapshot(i), count(k), count(i));
        }
        match matching_weight(inst, &claim.matching) {
            Ok(w) if w == claim.weight => {}
            Ok(w) => verdict.push(ConstraintId::Structure, Witness::Snapshot(i), claim.weight.clone(), w),
            Err(_) => verdict.push(ConstraintId::Structure, Witness::Snapshot(i), Rational::zero(), Rational::zero()),
        }
        verdict.absorb(check_cardinality_certificate(inst, &claim.matching, &claim.certificate), k);
    }
    for (i, pair) in claims.windows(2).enumerate() {
        let diff = alternating_path_difference(&pair[0].matching, &pair[1].matching);
        if diff.kind != DifferenceKind::SinglePath {
            verdict.push(
                ConstraintId::SinglePath,
                Witness::Snapshots(i, i + 1),
                count(diff.components.len()),
                Rational::from_integer(1.into()),
            );
        }
    }
    verdict
}

/// Certifies every snapshot of a run from its frozen duals.
pub fn verify_run(inst: &Instance, run: &RunResult) -> Verdict {
    let claims: Vec<Claim> = run
        .snapshots
        .iter()
        .map(|s| Claim {
            matching: s.matching.clone(),
            weight: s.weight.clone(),
            certificate: transform_duals(&s.duals, s.cardinality),
        })
        .collect();
    verify_claims(inst, &claims)
}
