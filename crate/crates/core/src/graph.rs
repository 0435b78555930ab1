//! Weighted instances, matchings and the line-oriented file formats.
//!
//! Node ids are 0-based in memory and 1-based in every file and JSON
//! document. Instances are simple graphs: self-loops and repeated
//! unordered pairs are rejected rather than merged.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::rational::{format_rational, min_nonnegative_shift, parse_rational, Rational};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Rational,
}

impl Edge {
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn key(&self) -> (NodeId, NodeId) {
        ordered(self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("instance must have at least one node")]
    NoNodes,
    #[error("node {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("edge {{{u}, {v}}} is not in the instance")]
    EdgeNotInInstance { u: NodeId, v: NodeId },
    #[error("node {node} is covered twice")]
    SharedNode { node: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("missing `p edge <n> <m>` header")]
    MissingHeader,
    #[error("malformed header")]
    MalformedHeader,
    #[error("second header")]
    DuplicateHeader,
    #[error("edge line before header")]
    EdgeBeforeHeader,
    #[error("malformed edge line")]
    MalformedEdge,
    #[error("malformed matching line")]
    MalformedMatching,
    #[error("unrecognised line")]
    UnknownLine,
    #[error("bad weight: {0}")]
    BadWeight(String),
    #[error("header announces {expected} edges, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A simple undirected graph with exact rational edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    node_count: usize,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

impl Instance {
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, Rational)>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut inst = Instance {
            node_count,
            edges: Vec::new(),
            incident: vec![Vec::new(); node_count],
            lookup: HashMap::new(),
        };
        for (u, v, weight) in edges {
            inst.push_edge(u, v, weight)?;
        }
        Ok(inst)
    }

    fn push_edge(&mut self, u: NodeId, v: NodeId, weight: Rational) -> Result<(), GraphError> {
        for node in [u, v] {
            if node >= self.node_count {
                return Err(GraphError::NodeOutOfRange {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop { node: u });
        }
        let key = ordered(u, v);
        if self.lookup.contains_key(&key) {
            return Err(GraphError::DuplicateEdge { u: key.0, v: key.1 });
        }
        let id = self.edges.len();
        self.lookup.insert(key, id);
        self.incident[u].push(id);
        self.incident[v].push(id);
        self.edges.push(Edge { u, v, weight });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// δ(v), in input order.
    pub fn incident_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.incident[node]
    }

    /// E[U]: edges with both endpoints in `nodes`, in input order.
    pub fn induced_edges(&self, nodes: &BTreeSet<NodeId>) -> Vec<EdgeId> {
        (0..self.edges.len())
            .filter(|&id| {
                let e = &self.edges[id];
                nodes.contains(&e.u) && nodes.contains(&e.v)
            })
            .collect()
    }

    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.lookup.get(&ordered(u, v)).copied()
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<&Rational> {
        self.find_edge(u, v).map(|id| &self.edges[id].weight)
    }

    pub fn has_negative_weight(&self) -> bool {
        self.edges.iter().any(|e| e.weight.is_negative())
    }

    /// Checks that every member of `m` is an edge of this instance.
    pub fn check_matching(&self, m: &Matching) -> Result<(), GraphError> {
        for &(u, v) in m.pairs() {
            if u >= self.node_count || v >= self.node_count || self.find_edge(u, v).is_none() {
                return Err(GraphError::EdgeNotInInstance { u, v });
            }
        }
        Ok(())
    }

    /// Renders the instance in the `p edge` file format (1-based ids).
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p edge {} {}", self.node_count, self.edges.len()).unwrap();
        for e in &self.edges {
            writeln!(out, "e {} {} {}", e.u + 1, e.v + 1, format_rational(&e.weight)).unwrap();
        }
        out
    }
}

/// Parses the `p edge` instance format. Blank lines and `c` comments are skipped.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut inst: Option<Instance> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let err = |kind| ParseError { line, kind };
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            None => continue,
            Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(err(ParseErrorKind::DuplicateHeader));
                }
                let rest: Vec<&str> = tokens.collect();
                let [kind, n, m] = rest[..] else {
                    return Err(err(ParseErrorKind::MalformedHeader));
                };
                if kind != "edge" {
                    return Err(err(ParseErrorKind::MalformedHeader));
                }
                let n: usize = n.parse().map_err(|_| err(ParseErrorKind::MalformedHeader))?;
                let m: usize = m.parse().map_err(|_| err(ParseErrorKind::MalformedHeader))?;
                let fresh = Instance::new(n, []).map_err(|_| err(ParseErrorKind::MalformedHeader))?;
                header = Some((n, m));
                inst = Some(fresh);
            }
            Some("e") => {
                let Some(inst) = inst.as_mut() else {
                    return Err(err(ParseErrorKind::EdgeBeforeHeader));
                };
                let rest: Vec<&str> = tokens.collect();
                let [u, v, w] = rest[..] else {
                    return Err(err(ParseErrorKind::MalformedEdge));
                };
                let u = parse_node(u).ok_or_else(|| err(ParseErrorKind::MalformedEdge))?;
                let v = parse_node(v).ok_or_else(|| err(ParseErrorKind::MalformedEdge))?;
                let w = parse_rational(w).map_err(|e| err(ParseErrorKind::BadWeight(e.literal)))?;
                inst.push_edge(u, v, w).map_err(|e| err(e.into()))?;
            }
            Some(_) => return Err(err(ParseErrorKind::UnknownLine)),
        }
    }
    let (Some((_, m)), Some(inst)) = (header, inst) else {
        return Err(ParseError {
            line: last_line.max(1),
            kind: ParseErrorKind::MissingHeader,
        });
    };
    if inst.edge_count() != m {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::EdgeCountMismatch {
                expected: m,
                found: inst.edge_count(),
            },
        });
    }
    Ok(inst)
}

/// Parses a matching file: `m <u> <v>` lines, 1-based.
pub fn parse_matching(text: &str) -> Result<Matching, ParseError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |kind| ParseError { line, kind };
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            None | Some("c") => continue,
            Some("m") => {
                let rest: Vec<&str> = tokens.collect();
                let [u, v] = rest[..] else {
                    return Err(err(ParseErrorKind::MalformedMatching));
                };
                let u = parse_node(u).ok_or_else(|| err(ParseErrorKind::MalformedMatching))?;
                let v = parse_node(v).ok_or_else(|| err(ParseErrorKind::MalformedMatching))?;
                pairs.push((line, u, v));
            }
            Some(_) => return Err(err(ParseErrorKind::UnknownLine)),
        }
    }
    let mut m = Matching::empty();
    for (line, u, v) in pairs {
        m.insert(u, v).map_err(|e| ParseError {
            line,
            kind: e.into(),
        })?;
    }
    Ok(m)
}

fn parse_node(token: &str) -> Option<NodeId> {
    let id: usize = token.parse().ok()?;
    id.checked_sub(1)
}

fn ordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A set of pairwise node-disjoint edges, stored as ordered pairs.
///
/// Membership doubles as the characteristic vector; only the three sums
/// x(E), x(δ(v)) and x(E\[U\]) are exposed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl Matching {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, GraphError> {
        let mut m = Self::empty();
        for (u, v) in pairs {
            m.insert(u, v)?;
        }
        Ok(m)
    }

    /// Builds a matching from a mate array.
    pub fn from_mates(mates: &[Option<NodeId>]) -> Self {
        let pairs = mates
            .iter()
            .enumerate()
            .filter_map(|(v, m)| m.filter(|&u| v < u).map(|u| (v, u)))
            .collect();
        Matching { pairs }
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop { node: u });
        }
        for node in [u, v] {
            if self.covers(node) {
                return Err(GraphError::SharedNode { node });
            }
        }
        self.pairs.insert(ordered(u, v));
        Ok(())
    }

    pub fn remove(&mut self, u: NodeId, v: NodeId) -> bool {
        self.pairs.remove(&ordered(u, v))
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.pairs.contains(&ordered(u, v))
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = &(NodeId, NodeId)> + '_ {
        self.pairs.iter()
    }

    /// x(E).
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// x(δ(v)) is 1 exactly when this returns true.
    pub fn covers(&self, node: NodeId) -> bool {
        self.mate(node).is_some()
    }

    pub fn mate(&self, node: NodeId) -> Option<NodeId> {
        self.pairs
            .iter()
            .find(|&&(a, b)| a == node || b == node)
            .map(|&(a, b)| if a == node { b } else { a })
    }

    /// x(E\[U\]).
    pub fn count_inside(&self, nodes: &BTreeSet<NodeId>) -> usize {
        self.pairs
            .iter()
            .filter(|(a, b)| nodes.contains(a) && nodes.contains(b))
            .count()
    }

    /// Number of members with exactly one endpoint in `nodes`, i.e. x(δ(U)).
    pub fn count_leaving(&self, nodes: &BTreeSet<NodeId>) -> usize {
        self.pairs
            .iter()
            .filter(|(a, b)| nodes.contains(a) != nodes.contains(b))
            .count()
    }

    pub fn mates(&self, node_count: usize) -> Vec<Option<NodeId>> {
        let mut mates = vec![None; node_count];
        for &(a, b) in &self.pairs {
            mates[a] = Some(b);
            mates[b] = Some(a);
        }
        mates
    }

    /// Renders the matching in the `m <u> <v>` file format.
    pub fn to_text(&self) -> String {
        self.pairs
            .iter()
            .map(|(a, b)| format!("m {} {}\n", a + 1, b + 1))
            .collect()
    }
}

/// w(M) = Σ_{e ∈ M} w_e. The empty matching weighs 0.
pub fn matching_weight(inst: &Instance, m: &Matching) -> Result<Rational, GraphError> {
    let mut total = Rational::zero();
    for &(u, v) in m.pairs() {
        let w = inst.weight(u, v).ok_or(GraphError::EdgeNotInInstance { u, v })?;
        total += w;
    }
    Ok(total)
}

/// Records the constant added to every weight by [`normalize_weights`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationRecord {
    pub shift: Rational,
    pub original: Instance,
}

impl NormalizationRecord {
    /// Maps a normalized weight of a `k`-edge matching back to the original weights.
    pub fn original_weight(&self, normalized: &Rational, k: usize) -> Rational {
        normalized - &self.shift * Rational::from_integer(k.into())
    }
}

/// Shifts all weights by C = max(0, −min w) so they become nonnegative.
pub fn normalize_weights(inst: &Instance) -> (Instance, NormalizationRecord) {
    let shift = min_nonnegative_shift(inst.edges.iter().map(|e| &e.weight));
    let mut shifted = inst.clone();
    if !shift.is_zero() {
        for e in &mut shifted.edges {
            e.weight += &shift;
        }
    }
    (
        shifted,
        NormalizationRecord {
            shift,
            original: inst.clone(),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferenceKind {
    SinglePath,
    ConnectedOther,
    Disconnected,
}

/// Connected components of M Δ M′ with the classification used for
/// consecutive snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDifference {
    pub kind: DifferenceKind,
    /// Each component as a node sequence: paths run from the smaller end
    /// node, cycles start at their smallest node (closing node not repeated).
    pub components: Vec<Vec<NodeId>>,
}

pub fn alternating_path_difference(m: &Matching, m2: &Matching) -> PathDifference {
    let diff: Vec<(NodeId, NodeId)> = m.pairs.symmetric_difference(&m2.pairs).copied().collect();
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(a, b) in &diff {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }

    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    let mut all_paths = true;
    // Path components first from their lower end, then whatever is left is a cycle.
    let starts: Vec<NodeId> = adj
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&v, _)| v)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        if seen.contains(&start) {
            continue;
        }
        let is_path = adj[&start].len() == 1;
        all_paths &= is_path;
        let mut seq = vec![start];
        seen.insert(start);
        let mut cur = start;
        while let Some(&next) = adj[&cur].iter().find(|n| !seen.contains(*n)) {
            seen.insert(next);
            seq.push(next);
            cur = next;
        }
        components.push(seq);
    }
    components.sort();

    let kind = match components.len() {
        1 if all_paths => DifferenceKind::SinglePath,
        1 => DifferenceKind::ConnectedOther,
        _ => DifferenceKind::Disconnected,
    };
    PathDifference { kind, components }
}
