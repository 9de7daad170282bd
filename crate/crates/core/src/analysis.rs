//! b-value calculus, gadget classification and exhaustive coloring checks.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_core::{Color, Coloring, DirectedWalk, GraphError, LabeledGraph, NodeId, WalkKind};
use crate::topologies::{GadgetChainHost, GridGeometry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("color {0} is outside {{1, 2, 3}}")]
    ColorOutOfRange(Color),
    #[error("node {0} is uncolored")]
    Uncolored(NodeId),
    #[error("walk edge {0}-{1} is monochromatic")]
    ImproperEdge(NodeId, NodeId),
    #[error("walk edge {0}-{1} is not a host edge")]
    NotAnEdge(NodeId, NodeId),
    #[error("node {0} is not in the host")]
    UnknownNode(NodeId),
    #[error("cycle repeats a node")]
    NotSimple,
    #[error("the cycle lemma does not apply to hosts that wrap around")]
    WrapHost,
    #[error("expected a {0}")]
    WrongKind(&'static str),
    #[error("walk is not a full row cycle")]
    NotRowCycle,
    #[error("both row cycles run in the same direction")]
    SameOrientation,
    #[error("gadget {0} is only partially colored")]
    PartialGadget(u64),
    #[error("gadget {0} does not exist")]
    NoSuchGadget(u64),
    #[error("gadget {0} is not properly colored")]
    ImproperGadget(u64),
    #[error("color {0} is confined to two lines of one gadget")]
    DoubleConfinement(Color),
    #[error("node set is not connected")]
    Disconnected,
    #[error("node set is empty")]
    EmptySet,
    #[error("no proper {0}-coloring exists")]
    NoColoring(u32),
    #[error("more than {0} colorings; enumeration aborted")]
    TooManyColorings(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// a(u, v) for a directed edge: `c(u) - c(v)` unless either color is 3.
pub fn a_value(cu: Color, cv: Color) -> Result<i64, AnalysisError> {
    for c in [cu, cv] {
        if !(1..=3).contains(&c) {
            return Err(AnalysisError::ColorOutOfRange(c));
        }
    }
    if cu == 3 || cv == 3 {
        Ok(0)
    } else {
        Ok(i64::from(cu) - i64::from(cv))
    }
}

fn color_of(col: &Coloring, v: NodeId) -> Result<Color, AnalysisError> {
    col.get(v).ok_or(AnalysisError::Uncolored(v))
}

/// Sum of a-values along the walk, closing edge included for cycles.
pub fn b_value(col: &Coloring, w: &DirectedWalk) -> Result<i64, AnalysisError> {
    for &v in &w.nodes {
        let c = color_of(col, v)?;
        if !(1..=3).contains(&c) {
            return Err(AnalysisError::ColorOutOfRange(c));
        }
    }
    let mut b = 0;
    for (u, v) in w.directed_edges() {
        b += a_value(color_of(col, u)?, color_of(col, v)?)?;
    }
    Ok(b)
}

/// 1 when the node has color 3.
#[must_use]
pub fn i_value(c: Color) -> i64 {
    i64::from(c == 3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParityCheck {
    Ok,
    Violation { b: i64, expected_parity: i64 },
}

/// Checks the parity identity for a properly colored walk.
///
/// Paths: `b ≡ i(u) + i(v) + len`. Cycles: `b ≡ len` (mod 2).
pub fn check_parity(col: &Coloring, w: &DirectedWalk) -> Result<ParityCheck, AnalysisError> {
    for (u, v) in w.directed_edges() {
        if color_of(col, u)? == color_of(col, v)? {
            return Err(AnalysisError::ImproperEdge(u, v));
        }
    }
    let b = b_value(col, w)?;
    let len = w.len() as i64;
    let rhs = match w.kind {
        WalkKind::Path => {
            i_value(color_of(col, w.first())?) + i_value(color_of(col, w.last())?) + len
        }
        WalkKind::Cycle => len,
    };
    let expected_parity = rhs.rem_euclid(2);
    if b.rem_euclid(2) == expected_parity {
        Ok(ParityCheck::Ok)
    } else {
        Ok(ParityCheck::Violation { b, expected_parity })
    }
}

/// A colored simple cycle in a simple grid whose b-value is nonzero.
///
/// No proper 3-coloring of the grid extends these colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCycleCertificate {
    pub cycle: DirectedWalk,
    pub b: i64,
}

/// Row cycles of a column-wrapping grid traversed in opposite directions,
/// whose b-values do not cancel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusPairCertificate {
    pub c1: DirectedWalk,
    pub c2: DirectedWalk,
    pub b1: i64,
    pub b2: i64,
}

/// Two gadgets of one chain that fall in different colorfulness classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetConflictCertificate {
    pub first: (u64, GadgetClass),
    pub second: (u64, GadgetClass),
}

/// Proof that the current partial coloring has no proper completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Certificate {
    GridCycle(GridCycleCertificate),
    TorusPair(TorusPairCertificate),
    GadgetConflict(GadgetConflictCertificate),
}

impl Certificate {
    #[must_use]
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::GridCycle(_) => "grid_cycle",
            Certificate::TorusPair(_) => "torus_pair",
            Certificate::GadgetConflict(_) => "gadget_conflict",
        }
    }
}

fn walk_coords<H: GridGeometry + ?Sized>(
    host: &H,
    w: &DirectedWalk,
) -> Result<Vec<(u64, u64)>, AnalysisError> {
    w.nodes
        .iter()
        .map(|&v| host.coord_of(v).ok_or(AnalysisError::UnknownNode(v)))
        .collect()
}

/// Returns a certificate when a simple grid cycle has nonzero b-value.
pub fn cycle_zero_certificate<H: GridGeometry + ?Sized>(
    host: &H,
    col: &Coloring,
    c: &DirectedWalk,
) -> Result<Option<GridCycleCertificate>, AnalysisError> {
    if host.wrap_rows() || host.wrap_cols() {
        return Err(AnalysisError::WrapHost);
    }
    if c.kind != WalkKind::Cycle {
        return Err(AnalysisError::WrongKind("cycle"));
    }
    if !c.is_simple() {
        return Err(AnalysisError::NotSimple);
    }
    let coords = walk_coords(host, c)?;
    let pos: BTreeMap<NodeId, (u64, u64)> = c.nodes.iter().copied().zip(coords).collect();
    for (u, v) in c.directed_edges() {
        if !host.coords_adjacent(pos[&u], pos[&v]) {
            return Err(AnalysisError::NotAnEdge(u, v));
        }
        if color_of(col, u)? == color_of(col, v)? {
            return Err(AnalysisError::ImproperEdge(u, v));
        }
    }
    let b = b_value(col, c)?;
    Ok((b != 0).then(|| GridCycleCertificate {
        cycle: c.clone(),
        b,
    }))
}

/// Row index and direction (true = increasing columns) of a full row cycle.
fn row_cycle_shape<H: GridGeometry + ?Sized>(
    host: &H,
    c: &DirectedWalk,
) -> Result<(u64, bool), AnalysisError> {
    if c.kind != WalkKind::Cycle {
        return Err(AnalysisError::WrongKind("cycle"));
    }
    let coords = walk_coords(host, c)?;
    let b = host.cols();
    let row = coords[0].0;
    if coords.len() as u64 != b || coords.iter().any(|&(i, _)| i != row) || !c.is_simple() {
        return Err(AnalysisError::NotRowCycle);
    }
    let step = |j: u64, fwd: bool| {
        if fwd {
            j % b + 1
        } else if j == 1 {
            b
        } else {
            j - 1
        }
    };
    for fwd in [true, false] {
        let ok = (0..coords.len()).all(|t| {
            let next = coords[(t + 1) % coords.len()].1;
            step(coords[t].1, fwd) == next
        });
        if ok {
            return Ok((row, fwd));
        }
    }
    Err(AnalysisError::NotRowCycle)
}

/// Certificate when two oppositely oriented row cycles have `b1 + b2 ≠ 0`.
pub fn torus_pair_certificate<H: GridGeometry + ?Sized>(
    host: &H,
    col: &Coloring,
    c1: &DirectedWalk,
    c2: &DirectedWalk,
) -> Result<Option<TorusPairCertificate>, AnalysisError> {
    if !host.wrap_cols() || host.cols() < 3 {
        return Err(AnalysisError::NotRowCycle);
    }
    let (_, fwd1) = row_cycle_shape(host, c1)?;
    let (_, fwd2) = row_cycle_shape(host, c2)?;
    if fwd1 == fwd2 {
        return Err(AnalysisError::SameOrientation);
    }
    for c in [c1, c2] {
        for (u, v) in c.directed_edges() {
            if color_of(col, u)? == color_of(col, v)? {
                return Err(AnalysisError::ImproperEdge(u, v));
            }
        }
    }
    let b1 = b_value(col, c1)?;
    let b2 = b_value(col, c2)?;
    Ok((b1 + b2 != 0).then(|| TorusPairCertificate {
        c1: c1.clone(),
        c2: c2.clone(),
        b1,
        b2,
    }))
}

/// Colorfulness class of one gadget under a full coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GadgetClass {
    RowColorful { row: u64 },
    ColumnColorful { column: u64 },
    /// Possible only with more than `2k - 2` colors.
    Both { row: u64, column: u64 },
    Neither,
    Improper,
}

impl GadgetClass {
    #[must_use]
    pub fn is_row_colorful(&self) -> bool {
        matches!(self, GadgetClass::RowColorful { .. } | GadgetClass::Both { .. })
    }

    #[must_use]
    pub fn is_column_colorful(&self) -> bool {
        matches!(
            self,
            GadgetClass::ColumnColorful { .. } | GadgetClass::Both { .. }
        )
    }
}

/// Colors of gadget `l` as a `k × k` matrix, 0-based inside.
fn gadget_matrix(
    chain: &GadgetChainHost,
    l: u64,
    col: &Coloring,
) -> Result<Vec<Vec<Color>>, AnalysisError> {
    if !(1..=chain.gadget_count()).contains(&l) {
        return Err(AnalysisError::NoSuchGadget(l));
    }
    let k = chain.k();
    let mut m = vec![vec![0; k as usize]; k as usize];
    for i in 1..=k {
        for j in 1..=k {
            let id = chain.id_at((l, i, j)).expect("coordinate in range");
            m[(i - 1) as usize][(j - 1) as usize] =
                col.get(id).ok_or(AnalysisError::PartialGadget(l))?;
        }
    }
    Ok(m)
}

fn matrix_is_proper(m: &[Vec<Color>]) -> bool {
    let k = m.len();
    for i in 0..k {
        for j in 0..k {
            for i2 in 0..k {
                for j2 in 0..k {
                    if i != i2 && j != j2 && m[i][j] == m[i2][j2] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn all_distinct(it: impl Iterator<Item = Color>) -> bool {
    let v: Vec<_> = it.collect();
    let s: BTreeSet<_> = v.iter().collect();
    s.len() == v.len()
}

/// Classifies gadget `l`; the witness is the first colorful row or column.
pub fn classify_gadget(
    chain: &GadgetChainHost,
    l: u64,
    col: &Coloring,
) -> Result<GadgetClass, AnalysisError> {
    let m = gadget_matrix(chain, l, col)?;
    if !matrix_is_proper(&m) {
        return Ok(GadgetClass::Improper);
    }
    let k = m.len();
    let row = (0..k).find(|&i| all_distinct(m[i].iter().copied()));
    let column = (0..k).find(|&j| all_distinct((0..k).map(|i| m[i][j])));
    Ok(match (row, column) {
        (Some(r), Some(c)) => GadgetClass::Both {
            row: r as u64 + 1,
            column: c as u64 + 1,
        },
        (Some(r), None) => GadgetClass::RowColorful { row: r as u64 + 1 },
        (None, Some(c)) => GadgetClass::ColumnColorful {
            column: c as u64 + 1,
        },
        (None, None) => GadgetClass::Neither,
    })
}

/// Line a color is confined to: it appears at least twice there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confinement {
    Row(u64),
    Column(u64),
    None,
}

/// Confinement of every color used in gadget `l`.
pub fn confined_colors(
    chain: &GadgetChainHost,
    l: u64,
    col: &Coloring,
) -> Result<BTreeMap<Color, Confinement>, AnalysisError> {
    let m = gadget_matrix(chain, l, col)?;
    if !matrix_is_proper(&m) {
        return Err(AnalysisError::ImproperGadget(l));
    }
    let k = m.len();
    let mut out: BTreeMap<Color, Confinement> = BTreeMap::new();
    for row in &m {
        for &c in row {
            out.insert(c, Confinement::None);
        }
    }
    let mut assign = |c: Color, line: Confinement| -> Result<(), AnalysisError> {
        let slot = out.get_mut(&c).expect("color collected above");
        if *slot != Confinement::None {
            return Err(AnalysisError::DoubleConfinement(c));
        }
        *slot = line;
        Ok(())
    };
    for i in 0..k {
        for c in repeated(m[i].iter().copied()) {
            assign(c, Confinement::Row(i as u64 + 1))?;
        }
    }
    for j in 0..k {
        for c in repeated((0..k).map(|i| m[i][j])) {
            assign(c, Confinement::Column(j as u64 + 1))?;
        }
    }
    Ok(out)
}

fn repeated(it: impl Iterator<Item = Color>) -> BTreeSet<Color> {
    let mut count: BTreeMap<Color, usize> = BTreeMap::new();
    for c in it {
        *count.entry(c).or_default() += 1;
    }
    count
        .into_iter()
        .filter(|&(_, n)| n >= 2)
        .map(|(c, _)| c)
        .collect()
}

/// Visits every proper `k`-coloring of `g`: nodes in id order, colors ascending.
///
/// Returns `Break` if the visitor stopped early.
pub fn for_each_coloring<F>(g: &LabeledGraph, k: u32, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&Coloring) -> ControlFlow<()>,
{
    let order: Vec<NodeId> = g.nodes().collect();
    let index: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let earlier: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            g.neighbors(v)
                .iter()
                .map(|u| index[u])
                .filter(|&j| j < i)
                .collect()
        })
        .collect();
    let mut colors = vec![0u32; order.len()];
    let mut col = Coloring::new();
    fn rec<F: FnMut(&Coloring) -> ControlFlow<()>>(
        pos: usize,
        k: u32,
        order: &[NodeId],
        earlier: &[Vec<usize>],
        colors: &mut [u32],
        col: &mut Coloring,
        visit: &mut F,
    ) -> ControlFlow<()> {
        if pos == order.len() {
            return visit(col);
        }
        for c in 1..=k {
            if earlier[pos].iter().any(|&j| colors[j] == c) {
                continue;
            }
            colors[pos] = c;
            col.set(order[pos], c);
            rec(pos + 1, k, order, earlier, colors, col, visit)?;
        }
        colors[pos] = 0;
        col.unset(order[pos]);
        ControlFlow::Continue(())
    }
    rec(0, k, &order, &earlier, &mut colors, &mut col, &mut visit)
}

/// Result of a capped enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub colorings: Vec<Coloring>,
    pub truncated: bool,
}

/// Collects up to `limit` proper `k`-colorings in deterministic order.
#[must_use]
pub fn enumerate_colorings(g: &LabeledGraph, k: u32, limit: usize) -> Enumeration {
    let mut colorings = Vec::new();
    let mut truncated = false;
    let _ = for_each_coloring(g, k, |c| {
        if colorings.len() == limit {
            truncated = true;
            return ControlFlow::Break(());
        }
        colorings.push(c.clone());
        ControlFlow::Continue(())
    });
    Enumeration {
        colorings,
        truncated,
    }
}

/// Labels each node of `nodes` by the first position its color occurs.
///
/// Two colorings induce the same partition iff their signatures agree.
#[must_use]
pub fn partition_signature(col: &Coloring, nodes: &BTreeSet<NodeId>) -> Vec<usize> {
    let mut first: BTreeMap<Color, usize> = BTreeMap::new();
    nodes
        .iter()
        .map(|&v| {
            let c = col.get(v).expect("signature over colored nodes");
            let next = first.len();
            *first.entry(c).or_insert(next)
        })
        .collect()
}

/// Partition of a node set into color classes, parts ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionWitness {
    pub parts: Vec<BTreeSet<NodeId>>,
}

impl PartitionWitness {
    /// Groups the colored nodes of `nodes` by color.
    #[must_use]
    pub fn from_coloring(col: &Coloring, nodes: &BTreeSet<NodeId>) -> Self {
        let mut by_color: BTreeMap<Color, BTreeSet<NodeId>> = BTreeMap::new();
        for &v in nodes {
            if let Some(c) = col.get(v) {
                by_color.entry(c).or_default().insert(v);
            }
        }
        let mut parts: Vec<_> = by_color.into_values().collect();
        parts.sort_by_key(|p| *p.first().expect("parts are non-empty"));
        Self { parts }
    }

    #[must_use]
    pub fn same_part(&self, u: NodeId, v: NodeId) -> bool {
        self.parts.iter().any(|p| p.contains(&u) && p.contains(&v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inferability {
    Ok {
        witness: PartitionWitness,
        colorings_checked: usize,
    },
    Counterexample { first: Coloring, second: Coloring },
}

/// Upper bound on colorings visited by [`check_locally_inferable`].
pub const INFERABILITY_CAP: usize = 5_000_000;

/// Checks that every proper `k`-coloring of the `ell`-ball around `sub`
/// induces the same partition of `sub`.
pub fn check_locally_inferable(
    g: &LabeledGraph,
    k: u32,
    ell: usize,
    sub: &BTreeSet<NodeId>,
) -> Result<Inferability, AnalysisError> {
    if sub.is_empty() {
        return Err(AnalysisError::EmptySet);
    }
    if let Some(&v) = sub.iter().find(|&&v| !g.contains(v)) {
        return Err(AnalysisError::UnknownNode(v));
    }
    if !g.is_connected_set(sub) {
        return Err(AnalysisError::Disconnected);
    }
    let ball = g.ball(sub, ell)?;
    let region = g.induced_subgraph(&ball)?;
    let mut reference: Option<(Vec<usize>, Coloring)> = None;
    let mut counter = None;
    let mut checked = 0usize;
    let mut capped = false;
    let _ = for_each_coloring(&region, k, |c| {
        if checked == INFERABILITY_CAP {
            capped = true;
            return ControlFlow::Break(());
        }
        checked += 1;
        let restricted = c.restricted_to(sub);
        let sig = partition_signature(&restricted, sub);
        match &reference {
            None => {
                reference = Some((sig, restricted));
                ControlFlow::Continue(())
            }
            Some((s, _)) if *s == sig => ControlFlow::Continue(()),
            Some((_, first)) => {
                counter = Some((first.clone(), restricted));
                ControlFlow::Break(())
            }
        }
    });
    if let Some((first, second)) = counter {
        return Ok(Inferability::Counterexample { first, second });
    }
    if capped {
        return Err(AnalysisError::TooManyColorings(INFERABILITY_CAP));
    }
    let Some((_, first)) = reference else {
        return Err(AnalysisError::NoColoring(k));
    };
    Ok(Inferability::Ok {
        witness: PartitionWitness::from_coloring(&first, sub),
        colorings_checked: checked,
    })
}

/// Every simple cycle of `g` once, starting at its smallest node.
#[must_use]
pub fn simple_cycles(g: &LabeledGraph) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    for s in g.nodes() {
        let mut path = vec![s];
        let mut on_path = BTreeSet::from([s]);
        cycles_from(g, s, &mut path, &mut on_path, &mut out);
    }
    out
}

fn cycles_from(
    g: &LabeledGraph,
    s: NodeId,
    path: &mut Vec<NodeId>,
    on_path: &mut BTreeSet<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    let last = *path.last().expect("non-empty");
    for &v in g.neighbors(last) {
        if v == s && path.len() >= 3 && path[1] < last {
            out.push(path.clone());
        }
        if v > s && !on_path.contains(&v) {
            path.push(v);
            on_path.insert(v);
            cycles_from(g, s, path, on_path, out);
            on_path.remove(&v);
            path.pop();
        }
    }
}

/// Visits every simple directed path of `g`, including single nodes.
pub fn for_each_simple_path<F: FnMut(&[NodeId])>(g: &LabeledGraph, mut visit: F) {
    fn rec<F: FnMut(&[NodeId])>(
        g: &LabeledGraph,
        path: &mut Vec<NodeId>,
        on_path: &mut BTreeSet<NodeId>,
        visit: &mut F,
    ) {
        visit(path);
        let last = *path.last().expect("non-empty");
        for &v in g.neighbors(last) {
            if on_path.insert(v) {
                path.push(v);
                rec(g, path, on_path, visit);
                path.pop();
                on_path.remove(&v);
            }
        }
    }
    for s in g.nodes() {
        let mut path = vec![s];
        let mut on_path = BTreeSet::from([s]);
        rec(g, &mut path, &mut on_path, &mut visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topologies::{row_cycle, Direction, GridHost};

    fn colored_path(colors: &[Color]) -> (Coloring, DirectedWalk) {
        let nodes: Vec<NodeId> = (1..=colors.len() as NodeId).collect();
        let col = nodes.iter().copied().zip(colors.iter().copied()).collect();
        (col, DirectedWalk::path(nodes).unwrap())
    }

    #[test]
    fn a_values() {
        assert_eq!(a_value(1, 2), Ok(-1));
        assert_eq!(a_value(3, 1), Ok(0));
        assert_eq!(a_value(2, 1), Ok(1));
        assert_eq!(a_value(4, 1), Err(AnalysisError::ColorOutOfRange(4)));
        assert_eq!(a_value(1, 0), Err(AnalysisError::ColorOutOfRange(0)));
    }

    #[test]
    fn b_values_of_sample_paths() {
        let (c, p) = colored_path(&[3, 2, 1, 2, 1, 2, 3]);
        assert_eq!(b_value(&c, &p), Ok(0));
        let (c, p) = colored_path(&[3, 2, 1, 2, 1, 3]);
        assert_eq!(b_value(&c, &p), Ok(1));
        let (c, p) = colored_path(&[2]);
        assert_eq!(b_value(&c, &p), Ok(0));
    }

    #[test]
    fn b_value_needs_colors() {
        let p = DirectedWalk::path(vec![1, 2]).unwrap();
        let c: Coloring = [(1, 1)].into_iter().collect();
        assert_eq!(b_value(&c, &p), Err(AnalysisError::Uncolored(2)));
    }

    #[test]
    fn b_value_includes_closing_edge() {
        let c: Coloring = [(1, 1), (2, 2), (3, 3)].into_iter().collect();
        let cyc = DirectedWalk::cycle(vec![1, 2, 3]).unwrap();
        // a(1,2) = -1, a(2,3) = 0, a(3,1) = 0
        assert_eq!(b_value(&c, &cyc), Ok(-1));
    }

    #[test]
    fn parity_examples() {
        let (c, p) = colored_path(&[3, 2]);
        assert_eq!(check_parity(&c, &p), Ok(ParityCheck::Ok));
        let (c, p) = colored_path(&[1, 2]);
        assert_eq!(b_value(&c, &p), Ok(-1));
        assert_eq!(check_parity(&c, &p), Ok(ParityCheck::Ok));
        let (c, p) = colored_path(&[1, 1]);
        assert_eq!(check_parity(&c, &p), Err(AnalysisError::ImproperEdge(1, 2)));
    }

    #[test]
    fn every_cell_has_zero_b() {
        let grid = GridHost::build(2, 2, false, false).unwrap();
        let g = grid.graph();
        let cell = DirectedWalk::cycle(vec![1, 2, 4, 3]).unwrap();
        let all = enumerate_colorings(&g, 3, usize::MAX);
        assert_eq!(all.colorings.len(), 18);
        for c in &all.colorings {
            assert_eq!(b_value(c, &cell), Ok(0));
            assert_eq!(check_parity(c, &cell), Ok(ParityCheck::Ok));
        }
    }

    #[test]
    fn cycle_certificate_requires_nonzero_b() {
        // Interior (2,2) of a 3×3 grid is dropped: the 8-cycle around it.
        let grid = GridHost::build(3, 3, false, false).unwrap();
        let ring = |cs: [(u64, u64); 8]| {
            DirectedWalk::cycle(cs.iter().map(|&(i, j)| grid.id_at(i, j).unwrap()).collect())
                .unwrap()
        };
        let cyc = ring([(1, 1), (1, 2), (1, 3), (2, 3), (3, 3), (3, 2), (3, 1), (2, 1)]);
        // Colors 1,2,1,2,1,2,1,3 around the ring: b = -1+1-1+1-1+1+0+0 = 0
        let zero: Coloring = cyc.nodes.iter().copied().zip([1, 2, 1, 2, 1, 2, 1, 3]).collect();
        assert_eq!(cycle_zero_certificate(&grid, &zero, &cyc), Ok(None));
        // Colors 1,2,3,1,2,3,1,2 around the ring: b = -1+0+0-1+0+0-1+1 = -2
        let bad: Coloring = cyc.nodes.iter().copied().zip([1, 2, 3, 1, 2, 3, 1, 2]).collect();
        let cert = cycle_zero_certificate(&grid, &bad, &cyc).unwrap().unwrap();
        assert_eq!(cert.b, -2);
        let torus = GridHost::build(3, 3, true, true).unwrap();
        assert_eq!(
            cycle_zero_certificate(&torus, &bad, &cyc),
            Err(AnalysisError::WrapHost)
        );
        let twice = DirectedWalk::cycle(vec![1, 2, 1, 2]).unwrap();
        assert_eq!(
            cycle_zero_certificate(&grid, &bad, &twice),
            Err(AnalysisError::NotSimple)
        );
    }

    #[test]
    fn torus_pair_examples() {
        let host = GridHost::build(3, 5, false, true).unwrap();
        let row1 = row_cycle(&host, 1, Direction::Fwd).unwrap();
        let row3 = row_cycle(&host, 3, Direction::Rev).unwrap();
        let mut col = Coloring::new();
        for (j, c) in (1..=5).zip([1, 2, 1, 2, 3]) {
            col.set(host.id_at(1, j).unwrap(), c);
            col.set(host.id_at(3, j).unwrap(), c);
        }
        // Identical rows read in opposite directions: -1 and +1.
        assert_eq!(b_value(&col, &row1), Ok(-1));
        assert_eq!(b_value(&col, &row3), Ok(1));
        assert_eq!(torus_pair_certificate(&host, &col, &row1, &row3), Ok(None));
        // Mirror the pattern on row 3: both cycles now read 1,2,1,2,3.
        for (j, c) in (1..=5).zip([3, 2, 1, 2, 1]) {
            col.set(host.id_at(3, j).unwrap(), c);
        }
        let cert = torus_pair_certificate(&host, &col, &row1, &row3)
            .unwrap()
            .unwrap();
        assert_eq!((cert.b1, cert.b2), (-1, -1));
        let fwd3 = row_cycle(&host, 3, Direction::Fwd).unwrap();
        assert_eq!(
            torus_pair_certificate(&host, &col, &row1, &fwd3),
            Err(AnalysisError::SameOrientation)
        );
    }

    fn by_coords(chain: &GadgetChainHost, f: impl Fn(u64, u64) -> Color) -> Coloring {
        let mut col = Coloring::new();
        for i in 1..=chain.k() {
            for j in 1..=chain.k() {
                col.set(chain.id_at((1, i, j)).unwrap(), f(i, j));
            }
        }
        col
    }

    #[test]
    fn gadget_classes() {
        let chain = GadgetChainHost::build(3, 1).unwrap();
        let by_col = by_coords(&chain, |_, j| j as Color);
        assert_eq!(
            classify_gadget(&chain, 1, &by_col),
            Ok(GadgetClass::RowColorful { row: 1 })
        );
        let by_row = by_coords(&chain, |i, _| i as Color);
        assert_eq!(
            classify_gadget(&chain, 1, &by_row),
            Ok(GadgetClass::ColumnColorful { column: 1 })
        );
        let flat = by_coords(&chain, |_, _| 1);
        assert_eq!(classify_gadget(&chain, 1, &flat), Ok(GadgetClass::Improper));
        let mut partial = by_col.clone();
        partial.unset(chain.id_at((1, 2, 2)).unwrap());
        assert_eq!(
            classify_gadget(&chain, 1, &partial),
            Err(AnalysisError::PartialGadget(1))
        );
    }

    #[test]
    fn confinement() {
        let chain = GadgetChainHost::build(3, 1).unwrap();
        let by_col = by_coords(&chain, |_, j| j as Color);
        let conf = confined_colors(&chain, 1, &by_col).unwrap();
        for c in 1..=3 {
            assert_eq!(conf[&c], Confinement::Column(u64::from(c)));
        }
        let flat = by_coords(&chain, |_, _| 1);
        assert_eq!(
            confined_colors(&chain, 1, &flat),
            Err(AnalysisError::ImproperGadget(1))
        );
        let small = GadgetChainHost::build(2, 1).unwrap();
        let g = small.graph();
        for c in enumerate_colorings(&g, 2, usize::MAX).colorings {
            let conf = confined_colors(&small, 1, &c).unwrap();
            // Two colors on four nodes: each color fills a whole line.
            assert!(conf.values().all(|&x| x != Confinement::None), "{c:?}");
        }
    }

    #[test]
    fn enumeration_counts() {
        let edge = LabeledGraph::from_edges([(1, 2)]).unwrap();
        assert_eq!(enumerate_colorings(&edge, 2, usize::MAX).colorings.len(), 2);
        let tri = LabeledGraph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(enumerate_colorings(&tri, 3, usize::MAX).colorings.len(), 6);
        let c4 = LabeledGraph::from_edges([(1, 2), (2, 3), (3, 4), (4, 1)]).unwrap();
        assert_eq!(enumerate_colorings(&c4, 2, usize::MAX).colorings.len(), 2);
        let capped = enumerate_colorings(&tri, 3, 4);
        assert!(capped.truncated);
        assert_eq!(capped.colorings.len(), 4);
        let first = &enumerate_colorings(&tri, 3, 1).colorings[0];
        assert_eq!(first.iter().collect::<Vec<_>>(), vec![(1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn inferability_on_small_graphs() {
        let c6 = LabeledGraph::from_edges((1..=6).map(|i| (i, i % 6 + 1))).unwrap();
        let edge: BTreeSet<NodeId> = [1, 2].into_iter().collect();
        assert!(matches!(
            check_locally_inferable(&c6, 3, 0, &edge),
            Ok(Inferability::Ok { .. })
        ));
        let path3: BTreeSet<NodeId> = [1, 2, 3].into_iter().collect();
        assert!(matches!(
            check_locally_inferable(&c6, 3, 0, &path3),
            Ok(Inferability::Counterexample { .. })
        ));
        assert!(matches!(
            check_locally_inferable(&c6, 2, 0, &path3),
            Ok(Inferability::Ok { .. })
        ));
        let split: BTreeSet<NodeId> = [1, 3].into_iter().collect();
        assert_eq!(
            check_locally_inferable(&c6, 3, 0, &split),
            Err(AnalysisError::Disconnected)
        );
    }

    #[test]
    fn cycles_of_small_grids() {
        let g = GridHost::build(2, 3, false, false).unwrap().graph();
        assert_eq!(simple_cycles(&g).len(), 3);
        let g = GridHost::build(3, 3, false, false).unwrap().graph();
        assert_eq!(simple_cycles(&g).len(), 13);
    }

    #[test]
    fn paths_of_triangle() {
        let tri = LabeledGraph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap();
        let mut n = 0;
        for_each_simple_path(&tri, |_| n += 1);
        // 3 single nodes, 6 directed edges, 6 directed 2-paths
        assert_eq!(n, 15);
    }
}
