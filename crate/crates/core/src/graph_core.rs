//! Labeled undirected graphs, partial colorings and directed walks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node identifier. Hosts keep geometry elsewhere.
pub type NodeId = u64;

/// Colors are positive integers drawn from a palette `1..=c`.
pub type Color = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),
    #[error("walk has no nodes")]
    EmptyWalk,
    #[error("a cycle needs at least 3 distinct nodes, got {0}")]
    CycleTooShort(usize),
}

/// Simple undirected graph over explicit node ids.
///
/// Adjacency lists are kept sorted so iteration order is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    adj: BTreeMap<NodeId, Vec<NodeId>>,
    edge_count: usize,
}

impl LabeledGraph {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit node and edge lists.
    ///
    /// Duplicate edges collapse; endpoints must be listed in `nodes`.
    pub fn from_parts<N, E>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new();
        for v in nodes {
            g.add_node(v);
        }
        for (u, v) in edges {
            for x in [u, v] {
                if !g.contains(x) {
                    return Err(GraphError::UnknownNode(x));
                }
            }
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Builds a graph from edges alone, inserting endpoints as needed.
    pub fn from_edges<E>(edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new();
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Returns true if the node was new.
    pub fn add_node(&mut self, v: NodeId) -> bool {
        if self.adj.contains_key(&v) {
            return false;
        }
        self.adj.insert(v, Vec::new());
        true
    }

    /// Inserts an edge and any missing endpoint. Returns true if the edge was new.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.add_node(u);
        self.add_node(v);
        let nu = self.adj.get_mut(&u).expect("inserted above");
        match nu.binary_search(&v) {
            Ok(_) => return Ok(false),
            Err(pos) => nu.insert(pos, v),
        }
        let nv = self.adj.get_mut(&v).expect("inserted above");
        if let Err(pos) = nv.binary_search(&u) {
            nv.insert(pos, u);
        }
        self.edge_count += 1;
        Ok(true)
    }

    /// Removes an edge if present. Returns true if something was removed.
    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let removed = match self.adj.get_mut(&u) {
            Some(nu) => match nu.binary_search(&v) {
                Ok(pos) => {
                    nu.remove(pos);
                    true
                }
                Err(_) => false,
            },
            None => false,
        };
        if removed {
            if let Some(nv) = self.adj.get_mut(&v) {
                if let Ok(pos) = nv.binary_search(&u) {
                    nv.remove(pos);
                }
            }
            self.edge_count -= 1;
        }
        removed
    }

    /// Removes a node together with its incident edges.
    pub fn remove_node(&mut self, v: NodeId) -> bool {
        let Some(nbrs) = self.adj.remove(&v) else {
            return false;
        };
        for u in &nbrs {
            if let Some(nu) = self.adj.get_mut(u) {
                if let Ok(pos) = nu.binary_search(&v) {
                    nu.remove(pos);
                }
            }
        }
        self.edge_count -= nbrs.len();
        true
    }

    #[must_use]
    pub fn contains(&self, v: NodeId) -> bool {
        self.adj.contains_key(&v)
    }

    #[must_use]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj
            .get(&u)
            .is_some_and(|n| n.binary_search(&v).is_ok())
    }

    #[must_use]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.keys().copied()
    }

    #[must_use]
    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.adj.keys().copied().collect()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, n)| n.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Sorted neighbor list; empty for unknown nodes.
    #[must_use]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        self.adj.get(&v).map_or(&[], Vec::as_slice)
    }

    #[must_use]
    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    fn check_known<'a, I>(&self, s: I) -> Result<(), GraphError>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        for &v in s {
            if !self.contains(v) {
                return Err(GraphError::UnknownNode(v));
            }
        }
        Ok(())
    }

    /// Subgraph induced by `s`.
    pub fn induced_subgraph(&self, s: &BTreeSet<NodeId>) -> Result<LabeledGraph, GraphError> {
        self.check_known(s)?;
        let mut adj = BTreeMap::new();
        let mut twice = 0;
        for &v in s {
            let n: Vec<NodeId> = self
                .neighbors(v)
                .iter()
                .copied()
                .filter(|u| s.contains(u))
                .collect();
            twice += n.len();
            adj.insert(v, n);
        }
        Ok(LabeledGraph {
            adj,
            edge_count: twice / 2,
        })
    }

    /// All nodes within hop distance `r` of some node in `s`.
    pub fn ball(&self, s: &BTreeSet<NodeId>, r: usize) -> Result<BTreeSet<NodeId>, GraphError> {
        Ok(self.distances_from(s, r)?.into_keys().collect())
    }

    /// Hop distances from `s`, truncated at `r`.
    pub fn distances_from(
        &self,
        s: &BTreeSet<NodeId>,
        r: usize,
    ) -> Result<BTreeMap<NodeId, usize>, GraphError> {
        self.check_known(s)?;
        let mut dist: BTreeMap<NodeId, usize> = s.iter().map(|&v| (v, 0)).collect();
        let mut queue: VecDeque<NodeId> = s.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d == r {
                continue;
            }
            for &u in self.neighbors(v) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(u) {
                    e.insert(d + 1);
                    queue.push_back(u);
                }
            }
        }
        Ok(dist)
    }

    /// Ball around a single node.
    pub fn ball_of(&self, v: NodeId, r: usize) -> Result<BTreeSet<NodeId>, GraphError> {
        self.ball(&BTreeSet::from([v]), r)
    }

    /// Whether `s` is non-empty and induces a connected subgraph.
    #[must_use]
    pub fn is_connected_set(&self, s: &BTreeSet<NodeId>) -> bool {
        let Some(&start) = s.iter().next() else {
            return false;
        };
        if !s.iter().all(|&v| self.contains(v)) {
            return false;
        }
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in self.neighbors(v) {
                if s.contains(&u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.len() == s.len()
    }

    /// Connected components in ascending order of their smallest id.
    #[must_use]
    pub fn components(&self) -> Vec<BTreeSet<NodeId>> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for v in self.nodes() {
            if seen.contains(&v) {
                continue;
            }
            let mut comp = BTreeSet::from([v]);
            let mut stack = vec![v];
            seen.insert(v);
            while let Some(x) = stack.pop() {
                for &u in self.neighbors(x) {
                    if seen.insert(u) {
                        comp.insert(u);
                        stack.push(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Merges the nodes and edges of `other` into `self`.
    pub fn absorb(&mut self, other: &LabeledGraph) {
        for v in other.nodes() {
            self.add_node(v);
        }
        for (u, v) in other.edges() {
            self.add_edge(u, v).expect("source graph has no self-loops");
        }
    }
}

/// Labeled equality: same ids, same edges. Isomorphic copies differ.
#[must_use]
pub fn views_equal(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    a == b
}

/// A monochromatic edge `(u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("edge {u}-{v} has both endpoints colored {color}")]
pub struct MonochromaticEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub color: Color,
}

/// Checks that no edge has two endpoints with the same color.
///
/// Uncolored endpoints never violate. Reports the first offending edge in
/// canonical edge order.
pub fn is_proper(g: &LabeledGraph, col: &Coloring) -> Result<(), MonochromaticEdge> {
    for (u, v) in g.edges() {
        if let (Some(cu), Some(cv)) = (col.get(u), col.get(v)) {
            if cu == cv {
                return Err(MonochromaticEdge { u, v, color: cu });
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<NodeId>,
    edges: Vec<[NodeId; 2]>,
}

impl Serialize for LabeledGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            nodes: self.nodes().collect(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        LabeledGraph::from_parts(raw.nodes, raw.edges.into_iter().map(|[u, v]| (u, v)))
            .map_err(serde::de::Error::custom)
    }
}

/// Partial assignment of colors to nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring {
    assignment: BTreeMap<NodeId, Color>,
}

impl Coloring {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn get(&self, v: NodeId) -> Option<Color> {
        self.assignment.get(&v).copied()
    }

    pub fn set(&mut self, v: NodeId, c: Color) -> Option<Color> {
        self.assignment.insert(v, c)
    }

    pub fn unset(&mut self, v: NodeId) -> Option<Color> {
        self.assignment.remove(&v)
    }

    #[must_use]
    pub fn is_colored(&self, v: NodeId) -> bool {
        self.assignment.contains_key(&v)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Color)> + '_ {
        self.assignment.iter().map(|(&v, &c)| (v, c))
    }

    /// Largest color used, if any.
    #[must_use]
    pub fn max_color(&self) -> Option<Color> {
        self.assignment.values().copied().max()
    }

    /// True when every color lies in `1..=palette`.
    #[must_use]
    pub fn within_palette(&self, palette: Color) -> bool {
        self.assignment.values().all(|&c| (1..=palette).contains(&c))
    }

    /// Restriction to the nodes of `s`.
    #[must_use]
    pub fn restricted_to(&self, s: &BTreeSet<NodeId>) -> Coloring {
        Coloring {
            assignment: self
                .assignment
                .iter()
                .filter(|(v, _)| s.contains(v))
                .map(|(&v, &c)| (v, c))
                .collect(),
        }
    }
}

impl FromIterator<(NodeId, Color)> for Coloring {
    fn from_iter<I: IntoIterator<Item = (NodeId, Color)>>(iter: I) -> Self {
        Coloring {
            assignment: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Path,
    Cycle,
}

/// Ordered node sequence along edges. Cycles include the closing edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedWalk {
    pub nodes: Vec<NodeId>,
    pub kind: WalkKind,
}

impl DirectedWalk {
    pub fn path(nodes: Vec<NodeId>) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::EmptyWalk);
        }
        Ok(Self {
            nodes,
            kind: WalkKind::Path,
        })
    }

    pub fn cycle(nodes: Vec<NodeId>) -> Result<Self, GraphError> {
        if nodes.len() < 3 {
            return Err(GraphError::CycleTooShort(nodes.len()));
        }
        Ok(Self {
            nodes,
            kind: WalkKind::Cycle,
        })
    }

    /// Number of directed edges, counting the closing edge of a cycle.
    #[must_use]
    pub fn len(&self) -> usize {
        match self.kind {
            WalkKind::Path => self.nodes.len() - 1,
            WalkKind::Cycle => self.nodes.len(),
        }
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[must_use]
    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    #[must_use]
    pub fn last(&self) -> NodeId {
        *self.nodes.last().expect("walks are non-empty")
    }

    /// Directed edges in traversal order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let closing = match self.kind {
            WalkKind::Cycle => Some((self.last(), self.first())),
            WalkKind::Path => None,
        };
        self.nodes.windows(2).map(|w| (w[0], w[1])).chain(closing)
    }

    /// Same nodes traversed the other way.
    #[must_use]
    pub fn reversed(&self) -> DirectedWalk {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        DirectedWalk {
            nodes,
            kind: self.kind,
        }
    }

    /// No node repeats.
    #[must_use]
    pub fn is_simple(&self) -> bool {
        let set: BTreeSet<_> = self.nodes.iter().collect();
        set.len() == self.nodes.len()
    }

    /// Checks that every walk edge exists in `g`.
    pub fn validate(&self, g: &LabeledGraph) -> Result<(), GraphError> {
        for &v in &self.nodes {
            if !g.contains(v) {
                return Err(GraphError::UnknownNode(v));
            }
        }
        for (u, v) in self.directed_edges() {
            if !g.has_edge(u, v) {
                return Err(GraphError::NotAdjacent(u, v));
            }
        }
        Ok(())
    }
}
