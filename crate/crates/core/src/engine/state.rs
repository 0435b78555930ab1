//! Mutable state of the primal-dual blossom algorithm.
//!
//! The matching is kept fully expanded (`mate` over original nodes) while
//! the laminar family is a forest of [`Blossom`]s. Each non-trivial blossom
//! stores its odd cycle of children together with the edges joining
//! consecutive children; `children[0]` always holds the base.
//!
//! Forest labels follow the alternating-distance convention: exposed
//! view-nodes are roots at even distance ([`Label::Even`]); their duals go
//! up in a dual update. [`Label::Odd`] nodes are reached through a
//! non-matching edge and their duals go down.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use super::duals::{BlossomDual, DualState};
use super::{Binding, EngineError, Infeasibility};
use crate::graph::{matching_weight, EdgeId, Instance, Matching, NodeId};
use crate::rational::Rational;

type BlossomId = usize;

#[derive(Debug, Clone)]
struct Blossom {
    parent: Option<BlossomId>,
    /// Empty for singletons.
    children: Vec<BlossomId>,
    /// `edges[i] = (a, b)` joins `children[i]` (holding `a`) to `children[i + 1]` (holding `b`).
    edges: Vec<(NodeId, NodeId)>,
    base: NodeId,
    pi: Rational,
    alive: bool,
}

impl Blossom {
    fn trivial(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    /// Even alternating distance from an exposed root (roots included).
    Even,
    /// Odd alternating distance from an exposed root.
    Odd,
    Free,
}

#[derive(Debug, Clone)]
struct Forest {
    label: Vec<Label>,
    /// Edge through which a labeled blossom was reached: `(p, q)` with `p`
    /// in the parent, `q` inside the blossom. Matched for even non-roots.
    link: Vec<Option<(NodeId, NodeId)>>,
    root: Vec<Option<NodeId>>,
}

impl Forest {
    fn new(size: usize) -> Self {
        Forest {
            label: vec![Label::Free; size],
            link: vec![None; size],
            root: vec![None; size],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ForestStatus {
    Stale,
    /// Growth stopped at an event; labels are valid up to that point.
    Event,
    Complete,
}

/// Outcome of growing the alternating forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    /// Tight edge joining even view-nodes of different trees.
    Augment { edge: (NodeId, NodeId) },
    /// Tight edge closing an odd cycle inside one tree.
    Blossom { edge: (NodeId, NodeId) },
    /// No walk between exposed view-nodes exists.
    Complete,
}

/// Largest uniform dual change allowed by the current forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alpha {
    Bounded { value: Rational, binding: Binding },
    Unbounded,
}

/// One node of the shrunken graph with its forest label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledNode {
    pub nodes: BTreeSet<NodeId>,
    pub label: Label,
    pub root: Option<NodeId>,
}

/// The shrunken graph: maximal sets as nodes, tight edges between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShrunkenView {
    pub nodes: Vec<BTreeSet<NodeId>>,
    /// `(i, j, edge)` with `i < j` indexing `nodes`.
    pub edges: Vec<(usize, usize, EdgeId)>,
}

/// Dual change applied by one phase, and the blossoms it deshrank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualUpdate {
    pub amounts: Vec<(NodeId, Rational)>,
    pub deshrunk: Vec<BTreeSet<NodeId>>,
}

#[derive(Debug, Clone)]
pub struct Engine<'a> {
    inst: &'a Instance,
    blossoms: Vec<Blossom>,
    top: Vec<BlossomId>,
    mate: Vec<Option<NodeId>>,
    forest: Forest,
    status: ForestStatus,
    beta: Rational,
}

impl<'a> Engine<'a> {
    /// Empty matching, π = β on singletons and no larger sets.
    pub fn new(inst: &'a Instance, beta: Rational) -> Result<Self, EngineError> {
        if let Some(e) = inst.edges().iter().find(|e| e.weight.is_negative()) {
            return Err(EngineError::NegativeWeight {
                u: e.u,
                v: e.v,
                weight: e.weight.clone(),
            });
        }
        let n = inst.node_count();
        let blossoms = (0..n)
            .map(|v| Blossom {
                parent: None,
                children: Vec::new(),
                edges: Vec::new(),
                base: v,
                pi: beta.clone(),
                alive: true,
            })
            .collect();
        let engine = Engine {
            inst,
            blossoms,
            top: (0..n).collect(),
            mate: vec![None; n],
            forest: Forest::new(n),
            status: ForestStatus::Stale,
            beta,
        };
        if let Some(violation) = engine.first_violation() {
            return Err(EngineError::InfeasibleInitialDuals(violation));
        }
        Ok(engine)
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn cardinality(&self) -> usize {
        self.mate.iter().filter(|m| m.is_some()).count() / 2
    }

    pub fn exposed_nodes(&self) -> Vec<NodeId> {
        (0..self.mate.len()).filter(|&v| self.mate[v].is_none()).collect()
    }

    /// The current matching in the original graph, read off the mate array.
    pub fn matching(&self) -> Matching {
        Matching::from_mates(&self.mate)
    }

    pub fn weight(&self) -> Rational {
        matching_weight(self.inst, &self.matching()).expect("engine only matches instance edges")
    }

    pub fn dual_state(&self) -> DualState {
        let n = self.inst.node_count();
        let mut blossoms: Vec<BlossomDual> = self.blossoms[n..]
            .iter()
            .enumerate()
            .filter(|(_, b)| b.alive)
            .map(|(i, b)| BlossomDual {
                nodes: self.leaves(n + i).into_iter().collect(),
                pi: b.pi.clone(),
            })
            .collect();
        blossoms.sort_by(|a, b| (a.nodes.len(), &a.nodes).cmp(&(b.nodes.len(), &b.nodes)));
        DualState {
            singletons: self.blossoms[..n].iter().map(|b| b.pi.clone()).collect(),
            blossoms,
            beta: self.beta.clone(),
        }
    }

    fn leaves(&self, b: BlossomId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            let blossom = &self.blossoms[x];
            if blossom.trivial() {
                out.push(x);
            } else {
                stack.extend(&blossom.children);
            }
        }
        out.sort_unstable();
        out
    }

    /// Maximal blossoms, ordered by their smallest node.
    fn top_level(&self) -> Vec<BlossomId> {
        let mut seen = vec![false; self.blossoms.len()];
        let mut out = Vec::new();
        for &b in &self.top {
            if !seen[b] {
                seen[b] = true;
                out.push(b);
            }
        }
        out
    }

    fn ancestors(&self, v: NodeId) -> Vec<BlossomId> {
        let mut chain = vec![v];
        let mut cur = v;
        while let Some(p) = self.blossoms[cur].parent {
            chain.push(p);
            cur = p;
        }
        chain
    }

    /// Σ π(U) over members of the family separating `u` from `v`.
    fn cut_sum(&self, u: NodeId, v: NodeId) -> Rational {
        let cu = self.ancestors(u);
        let cv = self.ancestors(v);
        let mut total = Rational::zero();
        for b in cu.iter().filter(|b| !cv.contains(b)) {
            total += &self.blossoms[*b].pi;
        }
        for b in cv.iter().filter(|b| !cu.contains(b)) {
            total += &self.blossoms[*b].pi;
        }
        total
    }

    pub fn slack(&self, edge: EdgeId) -> Rational {
        let e = self.inst.edge(edge);
        &e.weight - self.cut_sum(e.u, e.v)
    }

    fn first_violation(&self) -> Option<Infeasibility> {
        let n = self.inst.node_count();
        for (i, b) in self.blossoms.iter().enumerate().skip(n) {
            if b.alive && b.pi.is_negative() {
                return Some(Infeasibility::NegativeBlossom {
                    nodes: self.leaves(i),
                    pi: b.pi.clone(),
                });
            }
        }
        for e in self.inst.edges() {
            let load = self.cut_sum(e.u, e.v);
            if load > e.weight {
                return Some(Infeasibility::EdgeOverloaded {
                    u: e.u,
                    v: e.v,
                    load,
                    weight: e.weight.clone(),
                });
            }
        }
        None
    }

    /// Nodes of the shrunken graph and the tight edges between them.
    pub fn shrunken_view(&self) -> ShrunkenView {
        let tops = self.top_level();
        let index = |v: NodeId| tops.iter().position(|&b| b == self.top[v]).unwrap();
        let nodes = tops.iter().map(|&b| self.leaves(b).into_iter().collect()).collect();
        let edges = (0..self.inst.edge_count())
            .filter_map(|id| {
                let e = self.inst.edge(id);
                let (i, j) = (index(e.u), index(e.v));
                (i != j && self.slack(id).is_zero()).then(|| (i.min(j), i.max(j), id))
            })
            .collect();
        ShrunkenView { nodes, edges }
    }

    /// Labels of the last forest built, one entry per shrunken node.
    /// `None` while the forest is stale.
    pub fn forest_labels(&self) -> Option<Vec<LabeledNode>> {
        if self.status == ForestStatus::Stale {
            return None;
        }
        Some(
            self.top_level()
                .into_iter()
                .map(|b| LabeledNode {
                    nodes: self.leaves(b).into_iter().collect(),
                    label: self.forest.label[b],
                    root: self.forest.root[b],
                })
                .collect(),
        )
    }

    /// Roots of the current forest (exposed nodes), ascending.
    pub fn trees(&self) -> Vec<NodeId> {
        self.exposed_nodes()
    }

    /// Grows the alternating forest from scratch over the shrunken graph.
    ///
    /// Roots are scanned in ascending order, view-nodes in queue order and
    /// edges in input order; the first augmenting or blossom-closing tight
    /// edge stops the search.
    pub fn grow_forest(&mut self) -> Growth {
        let mut f = Forest::new(self.blossoms.len());
        let mut queue = VecDeque::new();
        for b in self.top_level() {
            let base = self.blossoms[b].base;
            if self.mate[base].is_none() {
                f.label[b] = Label::Even;
                f.root[b] = Some(base);
                queue.push_back(b);
            }
        }
        while let Some(b) = queue.pop_front() {
            for v in self.leaves(b) {
                for &id in self.inst.incident_edges(v) {
                    let u = self.inst.edge(id).other(v);
                    let c = self.top[u];
                    if c == b || f.label[c] == Label::Odd || !self.slack(id).is_zero() {
                        continue;
                    }
                    if f.label[c] == Label::Even {
                        let growth = if f.root[c] == f.root[b] {
                            Growth::Blossom { edge: (v, u) }
                        } else {
                            Growth::Augment { edge: (v, u) }
                        };
                        self.forest = f;
                        self.status = ForestStatus::Event;
                        return growth;
                    }
                    let base = self.blossoms[c].base;
                    let partner = self.mate[base].expect("unlabeled view-nodes are matched");
                    let d = self.top[partner];
                    f.label[c] = Label::Odd;
                    f.link[c] = Some((v, u));
                    f.root[c] = f.root[b];
                    f.label[d] = Label::Even;
                    f.link[d] = Some((base, partner));
                    f.root[d] = f.root[b];
                    queue.push_back(d);
                }
            }
        }
        self.forest = f;
        self.status = ForestStatus::Complete;
        Growth::Complete
    }

    fn check_event_edge(&self, edge: (NodeId, NodeId)) -> Result<(BlossomId, BlossomId), EngineError> {
        if self.status == ForestStatus::Stale {
            return Err(EngineError::StaleForest);
        }
        let (v, u) = edge;
        let id = self
            .inst
            .find_edge(v, u)
            .ok_or(EngineError::NotAnEventEdge { u: v, v: u })?;
        let (b, c) = (self.top[v], self.top[u]);
        let even = |x: BlossomId| self.forest.label[x] == Label::Even;
        if b == c || !even(b) || !even(c) || !self.slack(id).is_zero() {
            return Err(EngineError::NotAnEventEdge { u: v, v: u });
        }
        Ok((b, c))
    }

    /// Shrinks the odd cycle closed by `edge` into a new blossom with π = 0.
    pub fn shrink_blossom(&mut self, edge: (NodeId, NodeId)) -> Result<(), EngineError> {
        let (b, c) = self.check_event_edge(edge)?;
        if self.forest.root[b] != self.forest.root[c] {
            return Err(EngineError::WalkIsPath { u: edge.0, v: edge.1 });
        }
        let path_to_root = |mut x: BlossomId| {
            let mut path = vec![x];
            while let Some((p, _)) = self.forest.link[x] {
                x = self.top[p];
                path.push(x);
            }
            path
        };
        let path_b = path_to_root(b);
        let path_c = path_to_root(c);
        let base = *path_b.iter().find(|x| path_c.contains(x)).expect("same tree");
        let below_b = &path_b[..path_b.iter().position(|&x| x == base).unwrap()];
        let below_c = &path_c[..path_c.iter().position(|&x| x == base).unwrap()];

        let mut children = vec![base];
        children.extend(below_b.iter().rev());
        let mut edges: Vec<(NodeId, NodeId)> = children[1..]
            .iter()
            .map(|&x| self.forest.link[x].unwrap())
            .collect();
        edges.push(edge);
        for &x in below_c {
            children.push(x);
            let (p, q) = self.forest.link[x].unwrap();
            edges.push((q, p));
        }
        debug_assert_eq!(children.len(), edges.len());
        debug_assert_eq!(children.len() % 2, 1);

        let id = self.blossoms.len();
        for &child in &children {
            self.blossoms[child].parent = Some(id);
        }
        self.blossoms.push(Blossom {
            parent: None,
            base: self.blossoms[base].base,
            children,
            edges,
            pi: Rational::zero(),
            alive: true,
        });
        for v in self.leaves(id) {
            self.top[v] = id;
        }
        self.status = ForestStatus::Stale;
        Ok(())
    }

    /// Augments along the path through the tight edge `edge` joining two trees.
    pub fn augment(&mut self, edge: (NodeId, NodeId)) -> Result<(), EngineError> {
        let (b, c) = self.check_event_edge(edge)?;
        if self.forest.root[b] == self.forest.root[c] {
            return Err(EngineError::NotAnEventEdge { u: edge.0, v: edge.1 });
        }
        for (start, partner) in [edge, (edge.1, edge.0)] {
            let (mut s, mut j) = (start, partner);
            loop {
                let bs = self.top[s];
                self.rotate_base(bs, s);
                self.mate[s] = Some(j);
                let Some((p, _)) = self.forest.link[bs] else {
                    break;
                };
                let bt = self.top[p];
                let (x, y) = self.forest.link[bt].expect("odd view-nodes have a parent");
                self.rotate_base(bt, y);
                self.mate[y] = Some(x);
                s = x;
                j = y;
            }
        }
        self.status = ForestStatus::Stale;
        Ok(())
    }

    /// Rematches the interior of `b` so that `v` becomes its base, flipping
    /// the even-length alternating path around the cycle. `mate[v]` is left
    /// for the caller to assign.
    fn rotate_base(&mut self, b: BlossomId, v: NodeId) {
        if self.blossoms[b].trivial() {
            return;
        }
        let mut t = v;
        while self.blossoms[t].parent != Some(b) {
            t = self.blossoms[t].parent.expect("v lies inside b");
        }
        self.rotate_base(t, v);
        let len = self.blossoms[b].children.len();
        let i = self.blossoms[b].children.iter().position(|&x| x == t).unwrap();
        let flips: Vec<usize> = if i % 2 == 0 {
            (0..i).step_by(2).collect()
        } else {
            (i + 1..len).step_by(2).collect()
        };
        for k in flips {
            let (a, z) = self.blossoms[b].edges[k];
            let ca = self.blossoms[b].children[k];
            let cz = self.blossoms[b].children[(k + 1) % len];
            self.rotate_base(ca, a);
            self.rotate_base(cz, z);
            self.mate[a] = Some(z);
            self.mate[z] = Some(a);
        }
        let blossom = &mut self.blossoms[b];
        blossom.children.rotate_left(i);
        blossom.edges.rotate_left(i);
        blossom.base = v;
    }

    /// Bound on a uniform dual change over the completed forest.
    pub fn compute_alpha(&self) -> Result<Alpha, EngineError> {
        if self.status != ForestStatus::Complete {
            return Err(EngineError::ForestIncomplete);
        }
        let mut best: Option<(Rational, Binding)> = None;
        let mut offer = |value: Rational, binding: Binding| {
            if best.as_ref().is_none_or(|(v, _)| value < *v) {
                best = Some((value, binding));
            }
        };
        for b in self.top_level() {
            let blossom = &self.blossoms[b];
            if self.forest.label[b] == Label::Odd && !blossom.trivial() {
                offer(
                    blossom.pi.clone(),
                    Binding::OddBlossom {
                        nodes: self.leaves(b),
                    },
                );
            }
        }
        for (id, e) in self.inst.edges().iter().enumerate() {
            let (bu, bv) = (self.top[e.u], self.top[e.v]);
            if bu == bv {
                continue;
            }
            match (self.forest.label[bu], self.forest.label[bv]) {
                (Label::Even, Label::Free) | (Label::Free, Label::Even) => {
                    offer(self.slack(id), Binding::EvenFree { u: e.u, v: e.v })
                }
                (Label::Even, Label::Even) => offer(
                    self.slack(id) / Rational::from_integer(2.into()),
                    Binding::EvenEven { u: e.u, v: e.v },
                ),
                _ => {}
            }
        }
        Ok(match best {
            Some((value, binding)) => Alpha::Bounded { value, binding },
            None => Alpha::Unbounded,
        })
    }

    /// Applies a dual change of `amounts[i]` to the tree rooted at
    /// `trees()[i]`: even view-nodes gain it, odd ones lose it. Afterwards
    /// odd maximal blossoms whose π reached 0 are deshrunk.
    ///
    /// The update is rejected, leaving the state unchanged, if it breaks
    /// feasibility.
    pub fn apply_dual_update(&mut self, amounts: &[Rational]) -> Result<DualUpdate, EngineError> {
        if self.status != ForestStatus::Complete {
            return Err(EngineError::ForestIncomplete);
        }
        let roots = self.trees();
        if amounts.len() != roots.len() {
            return Err(EngineError::TreeCountMismatch {
                trees: roots.len(),
                amounts: amounts.len(),
            });
        }
        if let Some(a) = amounts.iter().find(|a| a.is_negative()) {
            return Err(EngineError::NegativeAmount(a.clone()));
        }
        let saved: Vec<Rational> = self.blossoms.iter().map(|b| b.pi.clone()).collect();
        let tops = self.top_level();
        for &b in &tops {
            let Some(root) = self.forest.root[b] else {
                continue;
            };
            let amount = &amounts[roots.binary_search(&root).expect("roots are exposed")];
            match self.forest.label[b] {
                Label::Even => self.blossoms[b].pi += amount,
                Label::Odd => self.blossoms[b].pi -= amount,
                Label::Free => {}
            }
        }
        if let Some(violation) = self.first_violation() {
            for (b, pi) in self.blossoms.iter_mut().zip(saved) {
                b.pi = pi;
            }
            return Err(EngineError::Infeasible(violation));
        }
        let mut deshrunk = Vec::new();
        for &b in &tops {
            let blossom = &self.blossoms[b];
            if self.forest.label[b] == Label::Odd && !blossom.trivial() && blossom.pi.is_zero() {
                deshrunk.push(self.leaves(b).into_iter().collect());
                self.expand(b);
            }
        }
        self.status = ForestStatus::Stale;
        Ok(DualUpdate {
            amounts: roots.into_iter().zip(amounts.iter().cloned()).collect(),
            deshrunk,
        })
    }

    fn expand(&mut self, b: BlossomId) {
        let children = std::mem::take(&mut self.blossoms[b].children);
        for &child in &children {
            self.blossoms[child].parent = None;
            for v in self.leaves(child) {
                self.top[v] = child;
            }
        }
        self.blossoms[b].edges.clear();
        self.blossoms[b].alive = false;
    }

    /// Rebuilds the matching in the original graph from the matching between
    /// maximal blossoms alone, expanding every blossom around its cycle.
    pub fn lift_matching(&self) -> Matching {
        let mut pairs = Vec::new();
        for b in self.top_level() {
            let leaves = self.leaves(b);
            let external = leaves.iter().find_map(|&v| {
                self.mate[v]
                    .filter(|&u| self.top[u] != b)
                    .map(|u| (v, u))
            });
            let entry = match external {
                Some((v, u)) => {
                    if v < u {
                        pairs.push((v, u));
                    }
                    v
                }
                None => self.blossoms[b].base,
            };
            self.lift_into(b, entry, &mut pairs);
        }
        Matching::from_pairs(pairs).expect("lifted edges are disjoint")
    }

    fn lift_into(&self, b: BlossomId, entry: NodeId, pairs: &mut Vec<(NodeId, NodeId)>) {
        let blossom = &self.blossoms[b];
        if blossom.trivial() {
            return;
        }
        let len = blossom.children.len();
        let t = blossom
            .children
            .iter()
            .position(|&c| self.leaves(c).contains(&entry))
            .expect("entry lies inside the blossom");
        self.lift_into(blossom.children[t], entry, pairs);
        for step in (1..len).step_by(2) {
            let i = (t + step) % len;
            let (a, z) = blossom.edges[i];
            pairs.push((a, z));
            self.lift_into(blossom.children[i], a, pairs);
            self.lift_into(blossom.children[(i + 1) % len], z, pairs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, int, ratio};

    fn p4() -> Instance {
        Instance::new(4, [(0, 1, int(5)), (1, 2, int(1)), (2, 3, int(5))]).unwrap()
    }

    fn triangle(w: [i64; 3]) -> Instance {
        Instance::new(3, [(0, 1, int(w[0])), (0, 2, int(w[1])), (1, 2, int(w[2]))]).unwrap()
    }

    #[test]
    fn p4_initial_alpha_is_half() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        assert_eq!(engine.grow_forest(), Growth::Complete);
        let labels = engine.forest_labels().unwrap();
        assert!(labels.iter().all(|n| n.label == Label::Even));
        match engine.compute_alpha().unwrap() {
            Alpha::Bounded { value, binding } => {
                assert_eq!(value, half());
                assert_eq!(binding, Binding::EvenEven { u: 1, v: 2 });
            }
            Alpha::Unbounded => panic!("bounded"),
        }
    }

    #[test]
    fn p4_dual_update_tightens_middle_edge() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        engine.grow_forest();
        engine.apply_dual_update(&[half(), half(), half(), half()]).unwrap();
        assert!(engine.dual_state().singletons.iter().all(|p| *p == half()));
        assert_eq!(engine.slack(1), int(0));
        assert_eq!(engine.slack(0), int(4));
        assert_eq!(engine.grow_forest(), Growth::Augment { edge: (1, 2) });
    }

    #[test]
    fn alpha_requires_complete_forest() {
        let inst = triangle([0, 0, 0]);
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        assert_eq!(engine.compute_alpha(), Err(EngineError::ForestIncomplete));
        assert!(matches!(engine.grow_forest(), Growth::Augment { .. }));
        assert_eq!(engine.compute_alpha(), Err(EngineError::ForestIncomplete));
    }

    #[test]
    fn zero_alpha_leaves_duals_alone() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        engine.grow_forest();
        let before = engine.dual_state();
        let update = engine.apply_dual_update(&[int(0), int(0), int(0), int(0)]).unwrap();
        assert!(update.deshrunk.is_empty());
        assert_eq!(engine.dual_state(), before);
    }

    #[test]
    fn infeasible_amounts_are_rejected_without_change() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        engine.grow_forest();
        let before = engine.dual_state();
        let err = engine.apply_dual_update(&[int(1), int(1), int(1), int(1)]).unwrap_err();
        assert_eq!(
            err,
            EngineError::Infeasible(Infeasibility::EdgeOverloaded {
                u: 1,
                v: 2,
                load: int(2),
                weight: int(1)
            })
        );
        assert_eq!(engine.dual_state(), before);
        assert!(matches!(
            engine.apply_dual_update(&[int(0)]),
            Err(EngineError::TreeCountMismatch { trees: 4, amounts: 1 })
        ));
    }

    #[test]
    fn triangle_shrinks_into_single_view_node() {
        // {1,2} matched by the first augmentation, then 3 closes the odd cycle.
        let inst = triangle([0, 0, 0]);
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        let Growth::Augment { edge } = engine.grow_forest() else { panic!() };
        engine.augment(edge).unwrap();
        let before = engine.lift_matching();
        let Growth::Blossom { edge } = engine.grow_forest() else { panic!() };
        engine.shrink_blossom(edge).unwrap();
        let duals = engine.dual_state();
        assert_eq!(duals.blossoms.len(), 1);
        assert_eq!(duals.blossoms[0].nodes, BTreeSet::from([0, 1, 2]));
        assert_eq!(duals.blossoms[0].pi, int(0));
        assert_eq!(engine.shrunken_view().nodes.len(), 1);
        assert_eq!(engine.lift_matching(), before);
        assert_eq!(engine.matching(), before);
    }

    #[test]
    fn shrink_rejects_paths() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        engine.grow_forest();
        engine.apply_dual_update(&[half(), half(), half(), half()]).unwrap();
        let Growth::Augment { edge } = engine.grow_forest() else { panic!() };
        assert_eq!(
            engine.shrink_blossom(edge),
            Err(EngineError::WalkIsPath { u: 1, v: 2 })
        );
    }

    #[test]
    fn lift_without_blossoms_is_identity() {
        let inst = p4();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        engine.grow_forest();
        engine.apply_dual_update(&[half(), half(), half(), half()]).unwrap();
        let Growth::Augment { edge } = engine.grow_forest() else { panic!() };
        engine.augment(edge).unwrap();
        assert_eq!(engine.lift_matching(), engine.matching());
        assert_eq!(engine.matching(), Matching::from_pairs([(1, 2)]).unwrap());
    }

    /// Pentagon 0..4 with a pendant 5 on node 0 and 6 on node 2.
    fn pentagon_with_pendants() -> Instance {
        Instance::new(
            7,
            [
                (0, 1, int(0)),
                (1, 2, int(0)),
                (2, 3, int(0)),
                (3, 4, int(0)),
                (4, 0, int(0)),
                (0, 5, int(4)),
                (2, 6, int(6)),
            ],
        )
        .unwrap()
    }

    fn drive_to_blossom(engine: &mut Engine) {
        loop {
            match engine.grow_forest() {
                Growth::Augment { edge } => engine.augment(edge).unwrap(),
                Growth::Blossom { edge } => {
                    engine.shrink_blossom(edge).unwrap();
                    return;
                }
                Growth::Complete => panic!("expected a blossom"),
            }
        }
    }

    #[test]
    fn lift_completes_blossom_interior_from_external_edge() {
        let inst = pentagon_with_pendants();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        drive_to_blossom(&mut engine);
        assert_eq!(engine.dual_state().blossoms[0].nodes, BTreeSet::from([0, 1, 2, 3, 4]));
        // Raise duals until the pendant edge at 0 becomes tight, then augment.
        let matched_before = engine.cardinality();
        loop {
            match engine.grow_forest() {
                Growth::Augment { edge } => {
                    engine.augment(edge).unwrap();
                    break;
                }
                Growth::Blossom { edge } => engine.shrink_blossom(edge).unwrap(),
                Growth::Complete => {
                    let Alpha::Bounded { value, .. } = engine.compute_alpha().unwrap() else { panic!() };
                    let n = engine.trees().len();
                    engine.apply_dual_update(&vec![value; n]).unwrap();
                }
            }
        }
        assert_eq!(engine.cardinality(), matched_before + 1);
        let m = engine.matching();
        assert_eq!(engine.lift_matching(), m);
        let inside: BTreeSet<NodeId> = [0, 1, 2, 3, 4].into();
        assert_eq!(m.count_inside(&inside), 2);
        assert!(m.contains(0, 5));
    }

    #[test]
    fn rotation_moves_base_and_keeps_near_perfect_interior() {
        let inst = pentagon_with_pendants();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        drive_to_blossom(&mut engine);
        let b = engine.top[0];
        let inside: BTreeSet<NodeId> = [0, 1, 2, 3, 4].into();
        assert!(engine.mate[engine.blossoms[b].base].is_none());
        for v in [0, 1, 2, 3, 4, 2, 0] {
            engine.rotate_base(b, v);
            engine.mate[v] = None;
            assert_eq!(engine.blossoms[b].base, v);
            let m = engine.matching();
            assert_eq!(m.count_inside(&inside), 2);
            assert_eq!(engine.lift_matching(), m);
        }
    }

    #[test]
    fn nested_blossoms_lift_to_near_perfect_interiors() {
        // Triangle {0,1,2} inside a pentagon-like cycle through 3 and 4.
        let inst = Instance::new(
            6,
            [
                (0, 1, int(0)),
                (1, 2, int(0)),
                (2, 0, int(0)),
                (2, 3, int(2)),
                (3, 4, int(0)),
                (4, 0, int(2)),
                (4, 5, int(10)),
            ],
        )
        .unwrap();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        let mut saw_nested = false;
        loop {
            if engine.exposed_nodes().is_empty() {
                break;
            }
            match engine.grow_forest() {
                Growth::Augment { edge } => engine.augment(edge).unwrap(),
                Growth::Blossom { edge } => engine.shrink_blossom(edge).unwrap(),
                Growth::Complete => {
                    let Alpha::Bounded { value, .. } = engine.compute_alpha().unwrap() else { break };
                    let n = engine.trees().len();
                    engine.apply_dual_update(&vec![value; n]).unwrap();
                }
            }
            let duals = engine.dual_state();
            saw_nested |= duals.blossoms.len() >= 2;
            let m = engine.matching();
            assert_eq!(engine.lift_matching(), m);
            for b in &duals.blossoms {
                assert_eq!(m.count_inside(&b.nodes), (b.nodes.len() - 1) / 2);
            }
        }
        assert!(saw_nested, "instance should produce a nested blossom");
        assert_eq!(engine.cardinality(), 3);
    }

    #[test]
    fn odd_blossom_with_zero_dual_binds_alpha() {
        // Triangle {0,1,2} shrinks, gets matched to 3 through node 0, and is
        // then reached from the exposed node 4 as an odd view-node with π = 0.
        let inst = Instance::new(
            5,
            [(0, 1, int(0)), (1, 2, int(0)), (2, 0, int(0)), (0, 3, int(0)), (1, 4, int(0))],
        )
        .unwrap();
        let mut engine = Engine::new(&inst, int(0)).unwrap();
        assert_eq!(engine.grow_forest(), Growth::Augment { edge: (0, 1) });
        engine.augment((0, 1)).unwrap();
        assert_eq!(engine.grow_forest(), Growth::Blossom { edge: (2, 0) });
        engine.shrink_blossom((2, 0)).unwrap();
        assert_eq!(engine.grow_forest(), Growth::Augment { edge: (0, 3) });
        engine.augment((0, 3)).unwrap();
        assert_eq!(engine.grow_forest(), Growth::Complete);
        let labels = engine.forest_labels().unwrap();
        assert_eq!(labels[0].nodes, BTreeSet::from([0, 1, 2]));
        assert_eq!(labels[0].label, Label::Odd);
        assert_eq!(
            engine.compute_alpha().unwrap(),
            Alpha::Bounded {
                value: int(0),
                binding: Binding::OddBlossom { nodes: vec![0, 1, 2] }
            }
        );
        let before = engine.matching();
        let update = engine.apply_dual_update(&[int(0)]).unwrap();
        assert_eq!(update.deshrunk, vec![BTreeSet::from([0, 1, 2])]);
        assert!(engine.dual_state().blossoms.is_empty());
        assert_eq!(engine.matching(), before);
        assert_eq!(engine.grow_forest(), Growth::Complete);
        assert_eq!(engine.compute_alpha().unwrap(), Alpha::Unbounded);
    }

    #[test]
    fn initial_duals_must_be_feasible() {
        let inst = p4();
        assert!(matches!(
            Engine::new(&inst, int(1)),
            Err(EngineError::InfeasibleInitialDuals(_))
        ));
        assert!(Engine::new(&inst, ratio(1, 2)).is_ok());
        let neg = Instance::new(2, [(0, 1, int(-1))]).unwrap();
        assert!(matches!(Engine::new(&neg, int(0)), Err(EngineError::NegativeWeight { .. })));
    }
}
