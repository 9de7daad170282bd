//! The partition oracle: the unique k-partition of a connected seen set,
//! read off any proper k-coloring of its radius-ℓ neighborhood.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::PartitionWitness;
use crate::graph_core::{Color, Coloring, GraphError, LabeledGraph, NodeId};

/// Default cap on the number of nodes the oracle will color.
pub const DEFAULT_NODE_GUARD: usize = 5_000;

/// Environment variable overriding [`DEFAULT_NODE_GUARD`].
pub const NODE_GUARD_ENV: &str = "COLORLAB_NODE_GUARD";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("query set is empty")]
    EmptyQuery,
    #[error("node {0} is not in the view")]
    UnknownNode(NodeId),
    #[error("query set is not connected in the view")]
    Disconnected,
    #[error("no proper {k}-coloring of the {nodes}-node neighborhood")]
    NoColoring { k: u32, nodes: usize },
    #[error("neighborhood has {nodes} nodes, above the guard of {guard}")]
    GuardExceeded { nodes: usize, guard: usize },
    #[error("radius {given} does not match the {family:?} family radius {expected}")]
    RadiusMismatch {
        family: OracleFamily,
        given: usize,
        expected: usize,
    },
    #[error("k = {0} is out of the supported range 1..=63")]
    BadK(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleFamily {
    Bipartite,
    Triangular,
    Ktree,
    Layered,
    Generic,
}

impl OracleFamily {
    /// Radius at which the family's k-coloring is locally inferable.
    #[must_use]
    pub fn radius(self, k: u32) -> Option<usize> {
        match self {
            OracleFamily::Bipartite => Some(0),
            OracleFamily::Triangular | OracleFamily::Ktree => Some(1),
            OracleFamily::Layered => Some(k as usize),
            OracleFamily::Generic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub family: OracleFamily,
    pub k: u32,
    pub ell: usize,
}

impl OracleConfig {
    /// Config with the family's own radius. `Generic` defaults to radius 0.
    #[must_use]
    pub fn for_family(family: OracleFamily, k: u32) -> Self {
        Self {
            family,
            k,
            ell: family.radius(k).unwrap_or(0),
        }
    }

    pub fn new(family: OracleFamily, k: u32, ell: usize) -> Result<Self, OracleError> {
        let cfg = Self { family, k, ell };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(1..=63).contains(&self.k) {
            return Err(OracleError::BadK(self.k));
        }
        match self.family.radius(self.k) {
            Some(expected) if expected != self.ell => Err(OracleError::RadiusMismatch {
                family: self.family,
                given: self.ell,
                expected,
            }),
            _ => Ok(()),
        }
    }
}

/// Node guard from the environment, else the default.
#[must_use]
pub fn node_guard() -> usize {
    std::env::var(NODE_GUARD_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_NODE_GUARD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorOrder {
    #[default]
    Ascending,
    Descending,
}

/// Reorders parts so part `s` holds the smallest id not in parts before it.
#[must_use]
pub fn canonicalize(p: &PartitionWitness) -> PartitionWitness {
    let mut parts = p.parts.clone();
    parts.sort_by_key(|part| part.first().copied().map_or((1, 0), |v| (0, v)));
    PartitionWitness { parts }
}

/// Finds one proper `k`-coloring of `g`, or `None` if there is none.
///
/// Backtracking with forward checking; the next node is the one with the
/// fewest remaining colors, ties to the smallest id.
#[must_use]
pub fn find_coloring(g: &LabeledGraph, k: u32, order: ColorOrder) -> Option<Coloring> {
    assert!((1..=63).contains(&k), "k out of range");
    let ids: Vec<NodeId> = g.nodes().collect();
    let n = ids.len();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|&v| g.neighbors(v).iter().map(|u| index[u]).collect())
        .collect();
    let full: u64 = (1u64 << k) - 1;
    let mut domain = vec![full; n];
    let mut color = vec![0u32; n];
    let mut assigned = 0usize;
    let mut undo: Vec<(usize, u64)> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> =
        (0..n).map(|i| Reverse((k, i))).collect();

    struct Frame {
        node: usize,
        remaining: u64,
        undo_len: usize,
    }
    let mut frames: Vec<Frame> = Vec::new();

    let pick = |heap: &mut BinaryHeap<Reverse<(u32, usize)>>, domain: &[u64], color: &[u32]| {
        while let Some(Reverse((size, i))) = heap.pop() {
            if color[i] == 0 && domain[i].count_ones() == size {
                return Some(i);
            }
        }
        None
    };
    let lowest = |mask: u64| match order {
        ColorOrder::Ascending => mask.trailing_zeros(),
        ColorOrder::Descending => 63 - mask.leading_zeros(),
    };

    'outer: loop {
        if assigned < n {
            let v = pick(&mut heap, &domain, &color).expect("an unassigned node is queued");
            frames.push(Frame {
                node: v,
                remaining: domain[v],
                undo_len: undo.len(),
            });
        } else {
            break;
        }
        // Try the remaining colors of the top frame, popping exhausted frames.
        loop {
            let Some(top) = frames.last_mut() else {
                return None;
            };
            let v = top.node;
            let undo_len = top.undo_len;
            if color[v] != 0 {
                color[v] = 0;
                assigned -= 1;
            }
            while undo.len() > undo_len {
                let (w, old) = undo.pop().expect("non-empty");
                domain[w] = old;
                heap.push(Reverse((old.count_ones(), w)));
            }
            if top.remaining == 0 {
                frames.pop();
                heap.push(Reverse((domain[v].count_ones(), v)));
                continue;
            }
            let bit_idx = lowest(top.remaining);
            top.remaining &= !(1u64 << bit_idx);
            let bit = 1u64 << bit_idx;
            color[v] = bit_idx + 1;
            assigned += 1;
            let mut wiped = false;
            for &w in &adj[v] {
                if color[w] == 0 && domain[w] & bit != 0 {
                    undo.push((w, domain[w]));
                    domain[w] &= !bit;
                    heap.push(Reverse((domain[w].count_ones(), w)));
                    if domain[w] == 0 {
                        wiped = true;
                        break;
                    }
                }
            }
            if !wiped {
                continue 'outer;
            }
        }
    }
    Some(
        ids.iter()
            .zip(&color)
            .map(|(&v, &c)| (v, c as Color))
            .collect(),
    )
}

/// The partition of `c` induced by the oracle's coloring of `ball(c, ℓ)`.
pub fn oracle_partition(
    cfg: &OracleConfig,
    view: &LabeledGraph,
    c: &BTreeSet<NodeId>,
) -> Result<PartitionWitness, OracleError> {
    oracle_partition_with(cfg, view, c, ColorOrder::Ascending, node_guard())
}

/// [`oracle_partition`] with an explicit color order and node guard.
pub fn oracle_partition_with(
    cfg: &OracleConfig,
    view: &LabeledGraph,
    c: &BTreeSet<NodeId>,
    order: ColorOrder,
    guard: usize,
) -> Result<PartitionWitness, OracleError> {
    cfg.validate()?;
    if c.is_empty() {
        return Err(OracleError::EmptyQuery);
    }
    if let Some(&v) = c.iter().find(|&&v| !view.contains(v)) {
        return Err(OracleError::UnknownNode(v));
    }
    if !view.is_connected_set(c) {
        return Err(OracleError::Disconnected);
    }
    let ball = view.ball(c, cfg.ell)?;
    if ball.len() > guard {
        return Err(OracleError::GuardExceeded {
            nodes: ball.len(),
            guard,
        });
    }
    let region = view.induced_subgraph(&ball)?;
    let col = find_coloring(&region, cfg.k, order).ok_or(OracleError::NoColoring {
        k: cfg.k,
        nodes: ball.len(),
    })?;
    Ok(canonicalize(&PartitionWitness::from_coloring(&col, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::is_proper;
    use crate::topologies::{GridHost, TriangularGridHost};

    fn set(v: &[NodeId]) -> BTreeSet<NodeId> {
        v.iter().copied().collect()
    }

    #[test]
    fn canonical_order() {
        let p = PartitionWitness {
            parts: vec![set(&[5]), set(&[2])],
        };
        let c = canonicalize(&p);
        assert_eq!(c.parts, vec![set(&[2]), set(&[5])]);
        assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn finds_colorings() {
        let tri = LabeledGraph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(find_coloring(&tri, 2, ColorOrder::Ascending).is_none());
        let col = find_coloring(&tri, 3, ColorOrder::Descending).unwrap();
        assert!(is_proper(&tri, &col).is_ok());
        let k4 = LabeledGraph::from_edges([(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]).unwrap();
        assert!(find_coloring(&k4, 3, ColorOrder::Ascending).is_none());
        let grid = GridHost::build(30, 30, false, false).unwrap().graph();
        let col = find_coloring(&grid, 2, ColorOrder::Ascending).unwrap();
        assert!(is_proper(&grid, &col).is_ok());
        assert_eq!(col.len(), 900);
        assert!(find_coloring(&LabeledGraph::new(), 2, ColorOrder::Ascending).is_some());
    }

    #[test]
    fn edge_in_bipartite_grid() {
        let g = GridHost::build(4, 4, false, false).unwrap().graph();
        let cfg = OracleConfig::for_family(OracleFamily::Bipartite, 2);
        let p = oracle_partition(&cfg, &g, &set(&[1, 2])).unwrap();
        assert_eq!(p.parts, vec![set(&[1]), set(&[2])]);
    }

    #[test]
    fn triangle_in_triangular_grid() {
        let host = TriangularGridHost::build(4).unwrap();
        let cfg = OracleConfig::for_family(OracleFamily::Triangular, 3);
        let a = host.id_at(1, 1).unwrap();
        let b = host.id_at(2, 1).unwrap();
        let c = host.id_at(1, 2).unwrap();
        let p = oracle_partition(&cfg, host.graph(), &set(&[a, b, c])).unwrap();
        assert_eq!(p.parts.len(), 3);
    }

    #[test]
    fn color_order_does_not_change_answer() {
        let host = TriangularGridHost::build(5).unwrap();
        let cfg = OracleConfig::for_family(OracleFamily::Triangular, 3);
        let c: BTreeSet<NodeId> = host.graph().ball_of(host.id_at(2, 2).unwrap(), 2).unwrap();
        let up = oracle_partition_with(&cfg, host.graph(), &c, ColorOrder::Ascending, 100).unwrap();
        let down =
            oracle_partition_with(&cfg, host.graph(), &c, ColorOrder::Descending, 100).unwrap();
        assert_eq!(up, down);
    }

    #[test]
    fn errors() {
        let g = GridHost::build(3, 3, false, false).unwrap().graph();
        let cfg = OracleConfig::for_family(OracleFamily::Bipartite, 2);
        assert_eq!(
            oracle_partition(&cfg, &g, &set(&[1, 9])),
            Err(OracleError::Disconnected)
        );
        assert_eq!(
            oracle_partition(&cfg, &g, &set(&[99])),
            Err(OracleError::UnknownNode(99))
        );
        assert_eq!(
            oracle_partition(&cfg, &g, &BTreeSet::new()),
            Err(OracleError::EmptyQuery)
        );
        let wide = OracleConfig::for_family(OracleFamily::Generic, 2);
        let wide = OracleConfig { ell: 4, ..wide };
        assert_eq!(
            oracle_partition_with(&wide, &g, &set(&[5]), ColorOrder::Ascending, 4),
            Err(OracleError::GuardExceeded { nodes: 9, guard: 4 })
        );
        let tri = LabeledGraph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap();
        let two = OracleConfig { ell: 1, ..cfg };
        assert!(matches!(
            oracle_partition(&two, &tri, &set(&[1])),
            Err(OracleError::RadiusMismatch { .. })
        ));
        let generic = OracleConfig::new(OracleFamily::Generic, 2, 1).unwrap();
        assert_eq!(
            oracle_partition(&generic, &tri, &set(&[1])),
            Err(OracleError::NoColoring { k: 2, nodes: 3 })
        );
    }
}
