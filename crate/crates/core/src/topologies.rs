//! Host graph families with their coordinate embeddings.
//!
//! Every host keeps its own bijection between node ids and positions.
//! Positions are dense `u64` indices that the audit uses to walk the host
//! without materializing it; the algorithm only ever sees ids.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_core::{DirectedWalk, GraphError, LabeledGraph, NodeId, WalkKind};

/// Dense index of a host vertex, independent of the ids served to players.
pub type Position = u64;

/// Largest supported side of an implicit grid.
pub const MAX_IMPLICIT_SIDE: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("coordinate ({0}, {1}) is outside the host")]
    OutOfRange(u64, u64),
    #[error("node {0} is not part of this host")]
    UnknownNode(NodeId),
    #[error("id {0} is already bound")]
    IdCollision(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Read access to a host by position. Used by the transcript audit.
pub trait HostGraph {
    fn has_position(&self, p: Position) -> bool;
    fn neighbor_positions(&self, p: Position) -> Vec<Position>;
    /// Position of an id under the host's own embedding.
    fn position_of(&self, id: NodeId) -> Option<Position>;
    /// Id carried by a position, if one is bound there.
    fn id_at_position(&self, p: Position) -> Option<NodeId>;
}

impl HostGraph for LabeledGraph {
    fn has_position(&self, p: Position) -> bool {
        self.contains(p)
    }

    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.neighbors(p).to_vec()
    }

    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.contains(id).then_some(id)
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.contains(p).then_some(p)
    }
}

/// Ball of radius `r` around `sources`, walked by position.
pub fn host_ball<H: HostGraph + ?Sized>(
    host: &H,
    sources: &[Position],
    r: usize,
) -> BTreeSet<Position> {
    let mut dist: HashMap<Position, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if host.has_position(s) && dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        if d == r {
            continue;
        }
        for q in host.neighbor_positions(p) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(q) {
                e.insert(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist.into_keys().collect()
}

/// Rectangular grids, concrete or implicit, with 1-based `(row, col)` coordinates.
pub trait GridGeometry {
    fn rows(&self) -> u64;
    fn cols(&self) -> u64;
    fn wrap_rows(&self) -> bool;
    fn wrap_cols(&self) -> bool;
    fn coord_of(&self, id: NodeId) -> Option<(u64, u64)>;
    fn id_at(&self, i: u64, j: u64) -> Option<NodeId>;

    fn in_range(&self, i: u64, j: u64) -> bool {
        (1..=self.rows()).contains(&i) && (1..=self.cols()).contains(&j)
    }

    /// Grid neighbors of a coordinate, in a fixed order.
    fn coord_neighbors(&self, i: u64, j: u64) -> Vec<(u64, u64)> {
        grid_coord_neighbors(
            self.rows(),
            self.cols(),
            self.wrap_rows(),
            self.wrap_cols(),
            i,
            j,
        )
    }

    fn coords_adjacent(&self, a: (u64, u64), b: (u64, u64)) -> bool {
        self.coord_neighbors(a.0, a.1).contains(&b)
    }
}

fn grid_coord_neighbors(
    rows: u64,
    cols: u64,
    wrap_rows: bool,
    wrap_cols: bool,
    i: u64,
    j: u64,
) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(4);
    if i > 1 {
        out.push((i - 1, j));
    } else if wrap_rows && rows >= 3 {
        out.push((rows, j));
    }
    if i < rows {
        out.push((i + 1, j));
    } else if wrap_rows && rows >= 3 {
        out.push((1, j));
    }
    if j > 1 {
        out.push((i, j - 1));
    } else if wrap_cols && cols >= 3 {
        out.push((i, cols));
    }
    if j < cols {
        out.push((i, j + 1));
    } else if wrap_cols && cols >= 3 {
        out.push((i, 1));
    }
    out
}

fn row_major(cols: u64, i: u64, j: u64) -> Position {
    (i - 1) * cols + j
}

fn from_row_major(cols: u64, p: Position) -> (u64, u64) {
    ((p - 1) / cols + 1, (p - 1) % cols + 1)
}

/// Materialized `a × b` grid, optionally wrapping rows and/or columns.
///
/// Wrap edges are only added when the wrapped side is at least 3, since
/// shorter sides would produce loops or duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridHost {
    rows: u64,
    cols: u64,
    wrap_rows: bool,
    wrap_cols: bool,
    ids: Vec<NodeId>,
    pos_of: HashMap<NodeId, Position>,
}

impl GridHost {
    /// Grid with row-major ids `(i-1)·b + j`.
    pub fn build(a: u64, b: u64, wrap_rows: bool, wrap_cols: bool) -> Result<Self, TopologyError> {
        let n = grid_size(a, b)?;
        Self::with_ids(a, b, wrap_rows, wrap_cols, (1..=n).collect())
    }

    /// Grid whose row-major cells carry the given ids.
    pub fn with_ids(
        a: u64,
        b: u64,
        wrap_rows: bool,
        wrap_cols: bool,
        ids: Vec<NodeId>,
    ) -> Result<Self, TopologyError> {
        let n = grid_size(a, b)?;
        if ids.len() as u64 != n {
            return Err(TopologyError::InvalidParameters(format!(
                "expected {n} ids, got {}",
                ids.len()
            )));
        }
        let mut pos_of = HashMap::with_capacity(ids.len());
        for (idx, &id) in ids.iter().enumerate() {
            if pos_of.insert(id, idx as Position + 1).is_some() {
                return Err(TopologyError::IdCollision(id));
            }
        }
        Ok(Self {
            rows: a,
            cols: b,
            wrap_rows,
            wrap_cols,
            ids,
            pos_of,
        })
    }

    #[must_use]
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// The host as a labeled graph over its ids.
    #[must_use]
    pub fn graph(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for &id in &self.ids {
            g.add_node(id);
        }
        for i in 1..=self.rows {
            for j in 1..=self.cols {
                let u = self.ids[(row_major(self.cols, i, j) - 1) as usize];
                for (x, y) in self.coord_neighbors(i, j) {
                    let v = self.ids[(row_major(self.cols, x, y) - 1) as usize];
                    g.add_edge(u, v).expect("grid neighbors are distinct");
                }
            }
        }
        g
    }

    /// `(id, (row, col))` pairs in row-major order.
    pub fn embedding(&self) -> impl Iterator<Item = (NodeId, (u64, u64))> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(|(idx, &id)| (id, from_row_major(self.cols, idx as Position + 1)))
    }
}

fn grid_size(a: u64, b: u64) -> Result<u64, TopologyError> {
    if a == 0 || b == 0 {
        return Err(TopologyError::InvalidParameters(format!(
            "grid dimensions must be positive, got {a}×{b}"
        )));
    }
    a.checked_mul(b)
        .filter(|&n| n <= 50_000_000)
        .ok_or_else(|| {
            TopologyError::InvalidParameters(format!("{a}×{b} is too large to materialize"))
        })
}

impl GridGeometry for GridHost {
    fn rows(&self) -> u64 {
        self.rows
    }
    fn cols(&self) -> u64 {
        self.cols
    }
    fn wrap_rows(&self) -> bool {
        self.wrap_rows
    }
    fn wrap_cols(&self) -> bool {
        self.wrap_cols
    }
    fn coord_of(&self, id: NodeId) -> Option<(u64, u64)> {
        self.pos_of.get(&id).map(|&p| from_row_major(self.cols, p))
    }
    fn id_at(&self, i: u64, j: u64) -> Option<NodeId> {
        self.in_range(i, j)
            .then(|| self.ids[(row_major(self.cols, i, j) - 1) as usize])
    }
}

impl HostGraph for GridHost {
    fn has_position(&self, p: Position) -> bool {
        (1..=self.ids.len() as Position).contains(&p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        let (i, j) = from_row_major(self.cols, p);
        self.coord_neighbors(i, j)
            .into_iter()
            .map(|(x, y)| row_major(self.cols, x, y))
            .collect()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.pos_of.get(&id).copied()
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.has_position(p).then(|| self.ids[(p - 1) as usize])
    }
}

/// Simple grid of up to `10^8 × 10^8` cells that only stores touched cells.
///
/// Ids come from a first-touch counter unless bound explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitGridHost {
    rows: u64,
    cols: u64,
    id_of: HashMap<(u64, u64), NodeId>,
    coord_of: HashMap<NodeId, (u64, u64)>,
    next_id: NodeId,
}

impl ImplicitGridHost {
    pub fn new(rows: u64, cols: u64) -> Result<Self, TopologyError> {
        if rows == 0 || cols == 0 || rows > MAX_IMPLICIT_SIDE || cols > MAX_IMPLICIT_SIDE {
            return Err(TopologyError::InvalidParameters(format!(
                "implicit grid sides must lie in 1..={MAX_IMPLICIT_SIDE}, got {rows}×{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            id_of: HashMap::new(),
            coord_of: HashMap::new(),
            next_id: 1,
        })
    }

    /// Id of a cell, assigning the next counter value on first touch.
    pub fn touch(&mut self, i: u64, j: u64) -> Result<NodeId, TopologyError> {
        if !self.in_range(i, j) {
            return Err(TopologyError::OutOfRange(i, j));
        }
        if let Some(&id) = self.id_of.get(&(i, j)) {
            return Ok(id);
        }
        while self.coord_of.contains_key(&self.next_id) {
            self.next_id += 1;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.id_of.insert((i, j), id);
        self.coord_of.insert(id, (i, j));
        Ok(id)
    }

    /// Binds a chosen id to a cell. Rebinding the same pair is a no-op.
    pub fn bind(&mut self, id: NodeId, i: u64, j: u64) -> Result<(), TopologyError> {
        if !self.in_range(i, j) {
            return Err(TopologyError::OutOfRange(i, j));
        }
        match (self.id_of.get(&(i, j)), self.coord_of.get(&id)) {
            (Some(&old), _) if old == id => Ok(()),
            (Some(_), _) => Err(TopologyError::InvalidParameters(format!(
                "cell ({i}, {j}) already carries an id"
            ))),
            (None, Some(_)) => Err(TopologyError::IdCollision(id)),
            (None, None) => {
                self.id_of.insert((i, j), id);
                self.coord_of.insert(id, (i, j));
                Ok(())
            }
        }
    }

    #[must_use]
    pub fn materialized(&self) -> usize {
        self.id_of.len()
    }

    /// Cells within distance `r` of `center`, computed from coordinates.
    #[must_use]
    pub fn ball_coords(&self, center: (u64, u64), r: u64) -> Vec<(u64, u64)> {
        let (ci, cj) = center;
        let mut out = Vec::new();
        let lo_i = ci.saturating_sub(r).max(1);
        let hi_i = (ci + r).min(self.rows);
        for i in lo_i..=hi_i {
            let rest = r - i.abs_diff(ci);
            let lo_j = cj.saturating_sub(rest).max(1);
            let hi_j = (cj + rest).min(self.cols);
            for j in lo_j..=hi_j {
                out.push((i, j));
            }
        }
        out
    }

    /// Subgraph induced on touched cells.
    #[must_use]
    pub fn touched_graph(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for (&(i, j), &id) in &self.id_of {
            g.add_node(id);
            for nb in self.coord_neighbors(i, j) {
                if let Some(&other) = self.id_of.get(&nb) {
                    g.add_edge(id, other).expect("distinct cells");
                }
            }
        }
        g
    }

    /// Bound `(id, (row, col))` pairs sorted by id.
    #[must_use]
    pub fn embedding(&self) -> Vec<(NodeId, (u64, u64))> {
        let mut v: Vec<_> = self.coord_of.iter().map(|(&id, &c)| (id, c)).collect();
        v.sort_unstable();
        v
    }
}

impl GridGeometry for ImplicitGridHost {
    fn rows(&self) -> u64 {
        self.rows
    }
    fn cols(&self) -> u64 {
        self.cols
    }
    fn wrap_rows(&self) -> bool {
        false
    }
    fn wrap_cols(&self) -> bool {
        false
    }
    fn coord_of(&self, id: NodeId) -> Option<(u64, u64)> {
        self.coord_of.get(&id).copied()
    }
    fn id_at(&self, i: u64, j: u64) -> Option<NodeId> {
        self.id_of.get(&(i, j)).copied()
    }
}

impl HostGraph for ImplicitGridHost {
    fn has_position(&self, p: Position) -> bool {
        p >= 1 && p <= self.rows * self.cols
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        let (i, j) = from_row_major(self.cols, p);
        self.coord_neighbors(i, j)
            .into_iter()
            .map(|(x, y)| row_major(self.cols, x, y))
            .collect()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.coord_of
            .get(&id)
            .map(|&(i, j)| row_major(self.cols, i, j))
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        if !self.has_position(p) {
            return None;
        }
        self.id_of.get(&from_row_major(self.cols, p)).copied()
    }
}

/// Direction along a row: increasing or decreasing column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Fwd,
    Rev,
}

/// Directed path along row `i` from column `j_from` to `j_to`.
///
/// On hosts that wrap columns the walk may pass the seam.
pub fn row_walk<H: GridGeometry + ?Sized>(
    host: &H,
    i: u64,
    j_from: u64,
    j_to: u64,
    dir: Direction,
) -> Result<DirectedWalk, TopologyError> {
    for j in [j_from, j_to] {
        if !host.in_range(i, j) {
            return Err(TopologyError::OutOfRange(i, j));
        }
    }
    let b = host.cols();
    let mut cols = vec![j_from];
    let mut j = j_from;
    while j != j_to {
        j = match dir {
            Direction::Fwd if j < b => j + 1,
            Direction::Rev if j > 1 => j - 1,
            Direction::Fwd if host.wrap_cols() && b >= 3 => 1,
            Direction::Rev if host.wrap_cols() && b >= 3 => b,
            _ => {
                return Err(TopologyError::InvalidParameters(format!(
                    "column {j_to} is not reachable from {j_from} going {dir:?} on row {i}"
                )))
            }
        };
        cols.push(j);
    }
    let nodes = ids_along_row(host, i, &cols)?;
    Ok(DirectedWalk::path(nodes)?)
}

/// Full row cycle on a host that wraps columns: `1..=b` forward, reversed otherwise.
pub fn row_cycle<H: GridGeometry + ?Sized>(
    host: &H,
    i: u64,
    dir: Direction,
) -> Result<DirectedWalk, TopologyError> {
    if !host.wrap_cols() || host.cols() < 3 {
        return Err(TopologyError::InvalidParameters(
            "row cycles need a column-wrapping host with at least 3 columns".into(),
        ));
    }
    if !host.in_range(i, 1) {
        return Err(TopologyError::OutOfRange(i, 1));
    }
    let mut cols: Vec<u64> = (1..=host.cols()).collect();
    if dir == Direction::Rev {
        cols.reverse();
    }
    let nodes = ids_along_row(host, i, &cols)?;
    Ok(DirectedWalk {
        nodes,
        kind: WalkKind::Cycle,
    })
}

fn ids_along_row<H: GridGeometry + ?Sized>(
    host: &H,
    i: u64,
    cols: &[u64],
) -> Result<Vec<NodeId>, TopologyError> {
    cols.iter()
        .map(|&j| host.id_at(i, j).ok_or(TopologyError::OutOfRange(i, j)))
        .collect()
}

/// Triangular grid `{(x, y) : x, y ≥ 0, x + y ≤ d}`.
///
/// Neighbors differ by a unit step along an axis or by `±(1, -1)`, so each
/// unit cell splits into two triangles and the boundary is a triangle too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularGridHost {
    d: u64,
    coords: Vec<(u64, u64)>,
    id_of: HashMap<(u64, u64), NodeId>,
    graph: LabeledGraph,
}

impl TriangularGridHost {
    pub fn build(d: u64) -> Result<Self, TopologyError> {
        if d < 1 {
            return Err(TopologyError::InvalidParameters(
                "triangular grid side must be at least 1".into(),
            ));
        }
        let mut coords = Vec::new();
        for x in 0..=d {
            for y in 0..=d - x {
                coords.push((x, y));
            }
        }
        let id_of: HashMap<_, _> = coords
            .iter()
            .enumerate()
            .map(|(idx, &c)| (c, idx as NodeId + 1))
            .collect();
        let mut graph = LabeledGraph::new();
        for (&(x, y), &id) in &id_of {
            graph.add_node(id);
            let (x, y) = (x as i64, y as i64);
            for (dx, dy) in [(1, 0), (0, 1), (1, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 {
                    continue;
                }
                if let Some(&other) = id_of.get(&(nx as u64, ny as u64)) {
                    graph.add_edge(id, other)?;
                }
            }
        }
        Ok(Self {
            d,
            coords,
            id_of,
            graph,
        })
    }

    #[must_use]
    pub fn side(&self) -> u64 {
        self.d
    }

    #[must_use]
    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    #[must_use]
    pub fn coord_of(&self, id: NodeId) -> Option<(u64, u64)> {
        self.coords.get(id.checked_sub(1)? as usize).copied()
    }

    #[must_use]
    pub fn id_at(&self, x: u64, y: u64) -> Option<NodeId> {
        self.id_of.get(&(x, y)).copied()
    }
}

impl HostGraph for TriangularGridHost {
    fn has_position(&self, p: Position) -> bool {
        self.graph.contains(p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.graph.neighbors(p).to_vec()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.graph.contains(id).then_some(id)
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.graph.contains(p).then_some(p)
    }
}

/// How a k-tree picks the k-clique each new node attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachRule {
    /// Attach to the k most recently added nodes.
    Path,
    /// Attach to a uniformly chosen existing k-clique.
    Random,
}

/// k-tree grown from a (k+1)-clique. Ids follow construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTreeHost {
    k: usize,
    graph: LabeledGraph,
    attach: BTreeMap<NodeId, Vec<NodeId>>,
}

impl KTreeHost {
    pub fn build(k: usize, n: usize, rule: AttachRule, seed: u64) -> Result<Self, TopologyError> {
        if k < 1 || n < k + 1 {
            return Err(TopologyError::InvalidParameters(format!(
                "a {k}-tree needs k ≥ 1 and at least {} nodes, got {n}",
                k + 1
            )));
        }
        let mut graph = LabeledGraph::new();
        let base: Vec<NodeId> = (1..=k as NodeId + 1).collect();
        for &v in &base {
            graph.add_node(v);
        }
        for (a, &u) in base.iter().enumerate() {
            for &v in &base[a + 1..] {
                graph.add_edge(u, v)?;
            }
        }
        let mut cliques: Vec<Vec<NodeId>> = Vec::new();
        if rule == AttachRule::Random {
            for skip in 0..base.len() {
                cliques.push(subset_without(&base, skip));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attach = BTreeMap::new();
        for v in (k as NodeId + 2)..=(n as NodeId) {
            let clique = match rule {
                AttachRule::Path => (v - k as NodeId..v).collect::<Vec<_>>(),
                AttachRule::Random => cliques[rng.gen_range(0..cliques.len())].clone(),
            };
            for &u in &clique {
                graph.add_edge(u, v)?;
            }
            if rule == AttachRule::Random {
                for skip in 0..clique.len() {
                    let mut c = subset_without(&clique, skip);
                    c.push(v);
                    cliques.push(c);
                }
            }
            attach.insert(v, clique);
        }
        Ok(Self { k, graph, attach })
    }

    #[must_use]
    pub fn k(&self) -> usize {
        self.k
    }

    #[must_use]
    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    /// The k-clique a non-base node was glued to.
    #[must_use]
    pub fn attachment(&self, v: NodeId) -> Option<&[NodeId]> {
        self.attach.get(&v).map(Vec::as_slice)
    }

    pub fn attachments(&self) -> impl Iterator<Item = (NodeId, &[NodeId])> + '_ {
        self.attach.iter().map(|(&v, c)| (v, c.as_slice()))
    }
}

fn subset_without(v: &[NodeId], skip: usize) -> Vec<NodeId> {
    v.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &x)| x)
        .collect()
}

impl HostGraph for KTreeHost {
    fn has_position(&self, p: Position) -> bool {
        self.graph.contains(p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.graph.neighbors(p).to_vec()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.graph.contains(id).then_some(id)
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.graph.contains(p).then_some(p)
    }
}

/// Gadget coordinate `(gadget, row, col)`, all 1-based.
pub type GadgetCoord = (u64, u64, u64);

/// Chain of `n'` gadgets `A(k)` with edges inside and between consecutive gadgets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetChainHost {
    k: u64,
    n_prime: u64,
    ids: Vec<NodeId>,
    pos_of: HashMap<NodeId, Position>,
}

impl GadgetChainHost {
    /// Chain with ids `(ℓ-1)·k² + (i-1)·k + j`.
    pub fn build(k: u64, n_prime: u64) -> Result<Self, TopologyError> {
        let n = gadget_size(k, n_prime)?;
        Self::with_ids(k, n_prime, (1..=n).collect())
    }

    /// Chain whose cells, in position order, carry the given ids.
    pub fn with_ids(k: u64, n_prime: u64, ids: Vec<NodeId>) -> Result<Self, TopologyError> {
        let n = gadget_size(k, n_prime)?;
        if ids.len() as u64 != n {
            return Err(TopologyError::InvalidParameters(format!(
                "expected {n} ids, got {}",
                ids.len()
            )));
        }
        let mut pos_of = HashMap::with_capacity(ids.len());
        for (idx, &id) in ids.iter().enumerate() {
            if pos_of.insert(id, idx as Position + 1).is_some() {
                return Err(TopologyError::IdCollision(id));
            }
        }
        Ok(Self {
            k,
            n_prime,
            ids,
            pos_of,
        })
    }

    #[must_use]
    pub fn k(&self) -> u64 {
        self.k
    }

    #[must_use]
    pub fn gadget_count(&self) -> u64 {
        self.n_prime
    }

    #[must_use]
    pub fn position(&self, (l, i, j): GadgetCoord) -> Position {
        (l - 1) * self.k * self.k + (i - 1) * self.k + j
    }

    #[must_use]
    pub fn coord_of_position(&self, p: Position) -> GadgetCoord {
        let k2 = self.k * self.k;
        let l = (p - 1) / k2 + 1;
        let r = (p - 1) % k2;
        (l, r / self.k + 1, r % self.k + 1)
    }

    #[must_use]
    pub fn contains_coord(&self, (l, i, j): GadgetCoord) -> bool {
        (1..=self.n_prime).contains(&l)
            && (1..=self.k).contains(&i)
            && (1..=self.k).contains(&j)
    }

    #[must_use]
    pub fn id_at(&self, c: GadgetCoord) -> Option<NodeId> {
        self.contains_coord(c)
            .then(|| self.ids[(self.position(c) - 1) as usize])
    }

    #[must_use]
    pub fn coord_of(&self, id: NodeId) -> Option<GadgetCoord> {
        self.pos_of.get(&id).map(|&p| self.coord_of_position(p))
    }

    /// Ids of gadget `l` in row-major order.
    #[must_use]
    pub fn gadget_ids(&self, l: u64) -> Vec<NodeId> {
        let mut out = Vec::new();
        for i in 1..=self.k {
            for j in 1..=self.k {
                if let Some(id) = self.id_at((l, i, j)) {
                    out.push(id);
                }
            }
        }
        out
    }

    /// Neighbors by the chain rule: same or consecutive gadget, different row and column.
    #[must_use]
    pub fn coord_neighbors(&self, (l, i, j): GadgetCoord) -> Vec<GadgetCoord> {
        let mut out = Vec::new();
        for nl in [l.wrapping_sub(1), l, l + 1] {
            if !(1..=self.n_prime).contains(&nl) {
                continue;
            }
            for ni in 1..=self.k {
                for nj in 1..=self.k {
                    if ni != i && nj != j {
                        out.push((nl, ni, nj));
                    }
                }
            }
        }
        out
    }

    #[must_use]
    pub fn graph(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for &id in &self.ids {
            g.add_node(id);
        }
        for p in 1..=self.ids.len() as Position {
            let u = self.ids[(p - 1) as usize];
            for c in self.coord_neighbors(self.coord_of_position(p)) {
                let v = self.ids[(self.position(c) - 1) as usize];
                g.add_edge(u, v).expect("distinct cells");
            }
        }
        g
    }

    /// `(id, (gadget, row, col))` pairs in position order.
    pub fn embedding(&self) -> impl Iterator<Item = (NodeId, GadgetCoord)> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(|(idx, &id)| (id, self.coord_of_position(idx as Position + 1)))
    }
}

fn gadget_size(k: u64, n_prime: u64) -> Result<u64, TopologyError> {
    if k < 2 || n_prime < 1 {
        return Err(TopologyError::InvalidParameters(format!(
            "gadget chains need k ≥ 2 and n' ≥ 1, got k={k}, n'={n_prime}"
        )));
    }
    k.checked_mul(k)
        .and_then(|k2| k2.checked_mul(n_prime))
        .filter(|&n| n <= 10_000_000)
        .ok_or_else(|| TopologyError::InvalidParameters("gadget chain too large".into()))
}

impl HostGraph for GadgetChainHost {
    fn has_position(&self, p: Position) -> bool {
        (1..=self.ids.len() as Position).contains(&p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.coord_neighbors(self.coord_of_position(p))
            .into_iter()
            .map(|c| self.position(c))
            .collect()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.pos_of.get(&id).copied()
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.has_position(p).then(|| self.ids[(p - 1) as usize])
    }
}

/// Layered graph `G_k` obtained by repeatedly duplicating a square grid.
///
/// Layer `t` adds one duplicate per node of `G_{t-1}`, in id order; the
/// duplicate of `x` gets id `|G_{t-1}| + x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredHost {
    k: u32,
    base: GridHost,
    graph: LabeledGraph,
    layer: BTreeMap<NodeId, u32>,
    parent: BTreeMap<NodeId, NodeId>,
    root: BTreeMap<NodeId, NodeId>,
}

impl LayeredHost {
    pub fn build(k: u32, base_side: u64) -> Result<Self, TopologyError> {
        if k < 2 || base_side < 2 {
            return Err(TopologyError::InvalidParameters(format!(
                "layered graphs need k ≥ 2 and base side ≥ 2, got k={k}, side={base_side}"
            )));
        }
        if k > 12 {
            return Err(TopologyError::InvalidParameters(format!(
                "k={k} would create too many layers"
            )));
        }
        let base = GridHost::build(base_side, base_side, false, false)?;
        let mut graph = base.graph();
        let mut layer: BTreeMap<NodeId, u32> = graph.nodes().map(|v| (v, 2)).collect();
        let mut root: BTreeMap<NodeId, NodeId> = graph.nodes().map(|v| (v, v)).collect();
        let mut parent = BTreeMap::new();
        for t in 3..=k {
            let prev = graph.clone();
            let offset = prev.node_count() as NodeId;
            for x in prev.nodes() {
                let dup = offset + x;
                graph.add_edge(dup, x)?;
                for &y in prev.neighbors(x) {
                    graph.add_edge(dup, y)?;
                }
                layer.insert(dup, t);
                parent.insert(dup, x);
                root.insert(dup, root[&x]);
            }
        }
        Ok(Self {
            k,
            base,
            graph,
            layer,
            parent,
            root,
        })
    }

    #[must_use]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[must_use]
    pub fn base(&self) -> &GridHost {
        &self.base
    }

    #[must_use]
    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    #[must_use]
    pub fn layer(&self, v: NodeId) -> Option<u32> {
        self.layer.get(&v).copied()
    }

    /// The node `v` duplicates, if `v` is not a base node.
    #[must_use]
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent.get(&v).copied()
    }

    /// Base-layer ancestor of `v`.
    #[must_use]
    pub fn root(&self, v: NodeId) -> Option<NodeId> {
        self.root.get(&v).copied()
    }

    /// Number of nodes in the layers up to `t`.
    #[must_use]
    pub fn size_through_layer(&self, t: u32) -> usize {
        self.layer.values().filter(|&&l| l <= t).count()
    }
}

impl HostGraph for LayeredHost {
    fn has_position(&self, p: Position) -> bool {
        self.graph.contains(p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.graph.neighbors(p).to_vec()
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.graph.contains(id).then_some(id)
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.graph.contains(p).then_some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: &LabeledGraph) -> BTreeSet<usize> {
        g.nodes().map(|v| g.degree(v)).collect()
    }

    fn triangles(g: &LabeledGraph) -> usize {
        let mut count = 0;
        for (u, v) in g.edges() {
            for &w in g.neighbors(v) {
                if w > v && g.has_edge(u, w) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn torus_3x3() {
        let g = GridHost::build(3, 3, true, true).unwrap().graph();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.edge_count(), 18);
        assert_eq!(degrees(&g), BTreeSet::from([4]));
    }

    #[test]
    fn simple_3x3() {
        let g = GridHost::build(3, 3, false, false).unwrap().graph();
        assert_eq!((g.node_count(), g.edge_count()), (9, 12));
    }

    #[test]
    fn cylinder_2x5_rows_are_cycles() {
        let h = GridHost::build(2, 5, false, true).unwrap();
        let g = h.graph();
        assert_eq!((g.node_count(), g.edge_count()), (10, 15));
        for i in 1..=2 {
            let row: BTreeSet<_> = (1..=5).map(|j| h.id_at(i, j).unwrap()).collect();
            let sub = g.induced_subgraph(&row).unwrap();
            assert_eq!(sub.edge_count(), 5);
            assert_eq!(degrees(&sub), BTreeSet::from([2]));
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(GridHost::build(0, 3, false, false).is_err());
        assert!(ImplicitGridHost::new(3, 0).is_err());
        assert!(ImplicitGridHost::new(MAX_IMPLICIT_SIDE + 1, 3).is_err());
    }

    #[test]
    fn row_major_ids() {
        let h = GridHost::build(4, 6, false, false).unwrap();
        assert_eq!(h.id_at(2, 3), Some(9));
        assert_eq!(h.coord_of(9), Some((2, 3)));
        assert_eq!(h.position_of(9), Some(9));
    }

    #[test]
    fn row_of_grid_induces_path() {
        let h = GridHost::build(5, 5, false, false).unwrap();
        let g = h.graph();
        let row: BTreeSet<_> = (1..=5).map(|j| h.id_at(3, j).unwrap()).collect();
        let sub = g.induced_subgraph(&row).unwrap();
        assert_eq!((sub.node_count(), sub.edge_count()), (5, 4));
        assert!(sub.is_connected_set(&row));
    }

    #[test]
    fn grid_ball_is_manhattan() {
        let h = GridHost::build(5, 5, false, false).unwrap();
        let g = h.graph();
        let c = h.id_at(3, 3).unwrap();
        let ball = g.ball_of(c, 1).unwrap();
        let want: BTreeSet<_> = [(3, 3), (2, 3), (4, 3), (3, 2), (3, 4)]
            .iter()
            .map(|&(i, j)| h.id_at(i, j).unwrap())
            .collect();
        assert_eq!(ball, want);
    }

    #[test]
    fn row_walks() {
        let grid = GridHost::build(5, 5, false, false).unwrap();
        let p = row_walk(&grid, 2, 1, 5, Direction::Fwd).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.validate(&grid.graph()).is_ok());
        let z = row_walk(&grid, 2, 3, 3, Direction::Fwd).unwrap();
        assert_eq!(z.len(), 0);
        assert!(row_walk(&grid, 2, 5, 1, Direction::Fwd).is_err());
        assert!(row_walk(&grid, 6, 1, 1, Direction::Fwd).is_err());
        let torus = GridHost::build(5, 5, true, true).unwrap();
        let c = row_cycle(&torus, 2, Direction::Fwd).unwrap();
        assert_eq!((c.kind, c.len()), (WalkKind::Cycle, 5));
        assert!(c.validate(&torus.graph()).is_ok());
        let wrap = row_walk(&torus, 2, 4, 2, Direction::Fwd).unwrap();
        assert_eq!(wrap.len(), 3);
        assert!(row_cycle(&grid, 2, Direction::Fwd).is_err());
    }

    #[test]
    fn triangular_small() {
        let t1 = TriangularGridHost::build(1).unwrap();
        assert_eq!(t1.graph().node_count(), 3);
        assert_eq!(triangles(t1.graph()), 1);
        let t2 = TriangularGridHost::build(2).unwrap();
        assert_eq!(t2.graph().node_count(), 6);
        assert_eq!(triangles(t2.graph()), 4);
        let origin = t2.id_at(0, 0).unwrap();
        assert_eq!(t2.graph().degree(origin), 2);
        assert!(TriangularGridHost::build(0).is_err());
    }

    #[test]
    fn k_tree_small() {
        let t = KTreeHost::build(2, 3, AttachRule::Path, 0).unwrap();
        assert_eq!((t.graph().node_count(), t.graph().edge_count()), (3, 3));
        let t = KTreeHost::build(2, 4, AttachRule::Path, 0).unwrap();
        assert_eq!((t.graph().node_count(), t.graph().edge_count()), (4, 5));
        assert_eq!(t.attachment(4), Some(&[2, 3][..]));
        assert!(KTreeHost::build(3, 3, AttachRule::Path, 0).is_err());
    }

    #[test]
    fn k_tree_random_attachments_are_cliques() {
        let t = KTreeHost::build(3, 10, AttachRule::Random, 7).unwrap();
        let g = t.graph();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 6 + 3 * 6);
        for (v, clique) in t.attachments() {
            assert_eq!(clique.len(), 3);
            for (a, &x) in clique.iter().enumerate() {
                assert!(g.has_edge(v, x));
                for &y in &clique[a + 1..] {
                    assert!(g.has_edge(x, y));
                }
            }
        }
    }

    #[test]
    fn gadget_chain_counts() {
        let g = GadgetChainHost::build(3, 1).unwrap().graph();
        assert_eq!((g.node_count(), g.edge_count()), (9, 18));
        let g = GadgetChainHost::build(3, 2).unwrap().graph();
        assert_eq!((g.node_count(), g.edge_count()), (18, 72));
        let h = GadgetChainHost::build(2, 3).unwrap();
        let g = h.graph();
        assert_eq!(g.node_count(), 12);
        for l in 1..=3 {
            let ids: BTreeSet<_> = h.gadget_ids(l).into_iter().collect();
            let sub = g.induced_subgraph(&ids).unwrap();
            assert_eq!(sub.edge_count(), 2);
            assert_eq!(degrees(&sub), BTreeSet::from([1]));
        }
        assert!(GadgetChainHost::build(1, 3).is_err());
    }

    #[test]
    fn layered_counts() {
        let h = LayeredHost::build(2, 6).unwrap();
        assert_eq!(h.graph().node_count(), 36);
        let h = LayeredHost::build(3, 4).unwrap();
        assert_eq!(h.graph().node_count(), 32);
        assert_eq!(h.parent(17), Some(1));
        assert_eq!(h.root(17), Some(1));
        assert_eq!(h.layer(17), Some(3));
        let h = LayeredHost::build(4, 3).unwrap();
        assert_eq!(h.graph().node_count(), 36);
        assert_eq!(h.root(36), Some(9));
        assert!(LayeredHost::build(1, 4).is_err());
    }

    #[test]
    fn implicit_touch_and_bind() {
        let mut h = ImplicitGridHost::new(MAX_IMPLICIT_SIDE, MAX_IMPLICIT_SIDE).unwrap();
        assert_eq!(h.touch(5, 5).unwrap(), 1);
        assert_eq!(h.touch(5, 6).unwrap(), 2);
        assert_eq!(h.touch(5, 5).unwrap(), 1);
        h.bind(10, 1, 1).unwrap();
        assert!(h.bind(10, 2, 2).is_err());
        assert!(h.bind(11, 1, 1).is_err());
        assert!(h.touch(0, 1).is_err());
        let g = h.touched_graph();
        assert!(g.has_edge(1, 2));
        let far = MAX_IMPLICIT_SIDE;
        assert_eq!(
            h.position_of(h.coord_of.iter().find(|(_, c)| **c == (1, 1)).map(|(&id, _)| id).unwrap()),
            Some(1)
        );
        assert_eq!(h.ball_coords((far, far), 1).len(), 3);
    }
}
