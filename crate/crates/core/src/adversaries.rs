//! Lower-bound adversaries and the baseline algorithms they are tested against.
//!
//! Lazy adversaries keep every discovered piece of the host in its own
//! coordinate frame and fix the placement of the pieces only when the
//! algorithm can no longer tell the difference.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{a_value, classify_gadget, cycle_zero_certificate, i_value, GadgetClass};
use crate::analysis::{GadgetConflictCertificate, TorusPairCertificate};
use crate::engine::{
    run_game_lazy, Adversary, AdversaryError, AlgorithmError, CommittedHost, Commitment,
    EngineError, LazyGame, LazySession, OnlineAlgorithm, SessionError, ViewUpdate,
};
use crate::graph_core::{Color, DirectedWalk, LabeledGraph, NodeId};
use crate::topologies::{
    host_ball, row_cycle, Direction, GadgetChainHost, GadgetCoord, GridHost, HostGraph,
    ImplicitGridHost, Position,
};

pub use crate::analysis::Certificate;

/// Side of the implicit grid used by the grid adversaries.
pub const GRID_SIDE: u64 = 100_000_000;

const MID: i64 = 50_000_000;

// ---------------------------------------------------------------------------
// Baselines

/// Smallest color not used by an already colored neighbor; 1 if none is free.
#[derive(Debug, Clone)]
pub struct GreedyFirstFit {
    palette: Color,
    colors: HashMap<NodeId, Color>,
}

impl GreedyFirstFit {
    #[must_use]
    pub fn new(palette: Color) -> Self {
        Self {
            palette,
            colors: HashMap::new(),
        }
    }
}

impl OnlineAlgorithm for GreedyFirstFit {
    fn name(&self) -> String {
        "greedy_first_fit".into()
    }
    fn palette(&self) -> Color {
        self.palette
    }
    fn step(
        &mut self,
        _i: usize,
        node: NodeId,
        view: &LabeledGraph,
        _sequence: &[NodeId],
    ) -> Result<Color, AlgorithmError> {
        let used: BTreeSet<Color> = view
            .neighbors(node)
            .iter()
            .filter_map(|u| self.colors.get(u).copied())
            .collect();
        let c = (1..=self.palette).find(|c| !used.contains(c)).unwrap_or(1);
        self.colors.insert(node, c);
        Ok(c)
    }
}

/// Colors node `id` with `((id - 1) mod palette) + 1`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPattern {
    palette: Color,
}

impl FixedPattern {
    #[must_use]
    pub fn new(palette: Color) -> Self {
        Self { palette }
    }
}

impl OnlineAlgorithm for FixedPattern {
    fn name(&self) -> String {
        "fixed_pattern".into()
    }
    fn palette(&self) -> Color {
        self.palette
    }
    fn step(&mut self, _: usize, node: NodeId, _: &LabeledGraph, _: &[NodeId]) -> Result<Color, AlgorithmError> {
        Ok(((node - 1) % u64::from(self.palette)) as Color + 1)
    }
}

/// Always answers 1.
#[derive(Debug, Clone, Copy)]
pub struct Stubborn {
    palette: Color,
}

impl Stubborn {
    #[must_use]
    pub fn new(palette: Color) -> Self {
        Self { palette }
    }
}

impl OnlineAlgorithm for Stubborn {
    fn name(&self) -> String {
        "stubborn".into()
    }
    fn palette(&self) -> Color {
        self.palette
    }
    fn step(&mut self, _: usize, _: NodeId, _: &LabeledGraph, _: &[NodeId]) -> Result<Color, AlgorithmError> {
        Ok(1)
    }
}

/// Stripes gadget chains by id block: `((id - 1) / k mod k) + 1`.
///
/// Under the default chain ids this colors row `i` of every gadget with `i`,
/// a proper `k`-coloring of the whole chain.
#[derive(Debug, Clone, Copy)]
pub struct RowStriping {
    k: u64,
}

impl RowStriping {
    #[must_use]
    pub fn new(k: u64) -> Self {
        Self { k }
    }
}

impl OnlineAlgorithm for RowStriping {
    fn name(&self) -> String {
        "row_striping".into()
    }
    fn palette(&self) -> Color {
        (2 * self.k - 2).max(self.k) as Color
    }
    fn step(&mut self, _: usize, node: NodeId, _: &LabeledGraph, _: &[NodeId]) -> Result<Color, AlgorithmError> {
        Ok(((node - 1) / self.k % self.k) as Color + 1)
    }
}

/// Named baseline opponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    GreedyFirstFit,
    FixedPattern,
    Stubborn,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::GreedyFirstFit, Baseline::FixedPattern, Baseline::Stubborn];

    #[must_use]
    pub fn build(self, palette: Color) -> Box<dyn OnlineAlgorithm> {
        match self {
            Baseline::GreedyFirstFit => Box::new(GreedyFirstFit::new(palette)),
            Baseline::FixedPattern => Box::new(FixedPattern::new(palette)),
            Baseline::Stubborn => Box::new(Stubborn::new(palette)),
        }
    }

    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::GreedyFirstFit => "greedy_first_fit",
            Baseline::FixedPattern => "fixed_pattern",
            Baseline::Stubborn => "stubborn",
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" | "greedy_first_fit" => Ok(Baseline::GreedyFirstFit),
            "fixed" | "fixed_pattern" => Ok(Baseline::FixedPattern),
            "stubborn" => Ok(Baseline::Stubborn),
            other => Err(format!("unknown baseline {other:?}")),
        }
    }
}

/// Baseline by name with the given palette.
pub fn baseline(name: &str, palette: Color) -> Result<Box<dyn OnlineAlgorithm>, String> {
    Ok(name.parse::<Baseline>()?.build(palette))
}

// ---------------------------------------------------------------------------
// Frames

/// Cells of one lazily placed piece of the host, keyed by local coordinates.
#[derive(Debug, Clone)]
struct Frame<C> {
    ids: HashMap<C, NodeId>,
}

impl<C: Copy + Eq + Hash + Ord> Frame<C> {
    fn new() -> Self {
        Self { ids: HashMap::new() }
    }

    /// Adds `ball(center, t)` to the frame and returns the view change.
    fn serve<N, F>(&mut self, center: C, t: usize, nbrs: N, mut fresh_id: F) -> ViewUpdate
    where
        N: Fn(C) -> Vec<C>,
        F: FnMut(C) -> NodeId,
    {
        let mut dist: HashMap<C, usize> = HashMap::from([(center, 0)]);
        let mut queue = VecDeque::from([center]);
        while let Some(c) = queue.pop_front() {
            let d = dist[&c];
            if d == t {
                continue;
            }
            for n in nbrs(c) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(n) {
                    e.insert(d + 1);
                    queue.push_back(n);
                }
            }
        }
        let mut cells: Vec<C> = dist.into_keys().filter(|c| !self.ids.contains_key(c)).collect();
        cells.sort_unstable();
        let mut nodes = Vec::with_capacity(cells.len());
        for &c in &cells {
            let id = fresh_id(c);
            self.ids.insert(c, id);
            nodes.push(id);
        }
        let mut edges = Vec::new();
        for &c in &cells {
            let x = self.ids[&c];
            for n in nbrs(c) {
                if let Some(&y) = self.ids.get(&n) {
                    edges.push((x, y));
                }
            }
        }
        ViewUpdate::Extend { nodes, edges }
    }
}

fn grid_nbrs((r, c): (i64, i64)) -> Vec<(i64, i64)> {
    vec![(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
}

/// Reveals through the session. `Ok(false)` once the algorithm has lost.
fn reveal(s: &mut LazySession<'_>, node: NodeId, update: ViewUpdate) -> Result<bool, AdversaryError> {
    match s.reveal(node, update) {
        Ok(_) => Ok(s.monochromatic().is_none()),
        Err(SessionError::GameOver) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Serves a reveal straight from a committed host.
fn serve_host<H: HostGraph + ?Sized>(
    host: &H,
    seen: &mut HashSet<Position>,
    node: NodeId,
    t: usize,
) -> Result<ViewUpdate, AdversaryError> {
    let p = host
        .position_of(node)
        .ok_or_else(|| AdversaryError::Precondition(format!("node {node} is not in the host")))?;
    let fresh: Vec<Position> = host_ball(host, &[p], t)
        .into_iter()
        .filter(|q| !seen.contains(q))
        .collect();
    seen.extend(fresh.iter().copied());
    let id = |q: Position| host.id_at_position(q).expect("committed hosts bind every position");
    let mut edges = Vec::new();
    for &q in &fresh {
        for r in host.neighbor_positions(q) {
            if seen.contains(&r) {
                edges.push((id(q), id(r)));
            }
        }
    }
    Ok(ViewUpdate::Extend {
        nodes: fresh.into_iter().map(id).collect(),
        edges,
    })
}

// ---------------------------------------------------------------------------
// b-value paths

/// A colored row segment of a grid, discovered lazily.
///
/// Every row node between the leftmost and rightmost revealed one is colored,
/// and the directed path `start → end` runs along the row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathRegion {
    pub row: u64,
    /// `(row, col)` of the first path node.
    pub start: (u64, u64),
    /// `(row, col)` of the last path node.
    pub end: (u64, u64),
    pub path: DirectedWalk,
    pub b: i64,
    /// Row distance between the farthest discovered row nodes.
    pub region_length: u64,
    /// Colors along the path, in path order.
    pub colors: Vec<Color>,
}

/// A region in its local frame: row 0, revealed columns `lo..=hi`.
#[derive(Debug, Clone)]
struct Region {
    frame: Frame<(i64, i64)>,
    lo: i64,
    hi: i64,
    u: i64,
    v: i64,
    b: i64,
}

impl Region {
    fn mirror(&mut self) {
        self.frame.ids = self.frame.ids.drain().map(|((r, c), id)| ((r, -c), id)).collect();
        (self.lo, self.hi) = (-self.hi, -self.lo);
        (self.u, self.v) = (-self.u, -self.v);
    }

    fn shift(&mut self, dr: i64, dc: i64) {
        self.frame.ids = self
            .frame
            .ids
            .drain()
            .map(|((r, c), id)| ((r + dr, c + dc), id))
            .collect();
        self.lo += dc;
        self.hi += dc;
        self.u += dc;
        self.v += dc;
    }

    /// Puts `u` left of `v`.
    fn orient(&mut self) {
        if self.u > self.v {
            self.mirror();
        }
    }

    fn row_id(&self, c: i64) -> NodeId {
        self.frame.ids[&(0, c)]
    }

    fn row_ids(&self, from: i64, to: i64) -> Vec<NodeId> {
        if from <= to {
            (from..=to).map(|c| self.row_id(c)).collect()
        } else {
            (to..=from).rev().map(|c| self.row_id(c)).collect()
        }
    }
}

fn b_of(s: &LazySession<'_>, nodes: &[NodeId]) -> Result<i64, AdversaryError> {
    let mut b = 0;
    for w in nodes.windows(2) {
        let cu = s.color_of(w[0]).expect("path nodes are revealed");
        let cv = s.color_of(w[1]).expect("path nodes are revealed");
        b += a_value(cu, cv)?;
    }
    Ok(b)
}

/// Shared machinery of the b-path and rectangle adversaries.
struct PathBuilder {
    t: usize,
    next_id: NodeId,
    regions: Vec<Option<Region>>,
    lost: bool,
}

impl PathBuilder {
    fn new(t: usize) -> Self {
        Self {
            t,
            next_id: 1,
            regions: Vec::new(),
            lost: false,
        }
    }

    fn region(&self, r: usize) -> &Region {
        self.regions[r].as_ref().expect("live region")
    }

    fn region_mut(&mut self, r: usize) -> &mut Region {
        self.regions[r].as_mut().expect("live region")
    }

    /// Reveals row cell `c` of region `r`.
    fn reveal_cell(&mut self, s: &mut LazySession<'_>, r: usize, cell: (i64, i64)) -> Result<bool, AdversaryError> {
        let t = self.t;
        let next = &mut self.next_id;
        let region = self.regions[r].as_mut().expect("live region");
        let update = region.frame.serve(cell, t, grid_nbrs, |_| {
            let id = *next;
            *next += 1;
            id
        });
        let node = region.frame.ids[&cell];
        let ok = reveal(s, node, update)?;
        if !ok {
            self.lost = true;
        }
        Ok(ok)
    }

    fn fresh_region(&mut self) -> usize {
        self.regions.push(Some(Region {
            frame: Frame::new(),
            lo: 0,
            hi: 0,
            u: 0,
            v: 0,
            b: 0,
        }));
        self.regions.len() - 1
    }

    /// Builds a region whose path has b-value at least `k`; `None` once the algorithm lost.
    fn build(&mut self, s: &mut LazySession<'_>, k: u32) -> Result<Option<usize>, AdversaryError> {
        if k == 0 {
            let r = self.fresh_region();
            return Ok(self.reveal_cell(s, r, (0, 0))?.then_some(r));
        }
        let target = i64::from(k);
        let Some(a) = self.build(s, k - 1)? else {
            return Ok(None);
        };
        if self.region(a).b >= target {
            return Ok(Some(a));
        }
        let Some(b) = self.build(s, k - 1)? else {
            return Ok(None);
        };
        if self.region(b).b >= target {
            return Ok(Some(b));
        }
        self.region_mut(a).orient();
        self.region_mut(b).orient();
        let (a_hi, a_v) = (self.region(a).hi, self.region(a).v);
        let (b_lo, b_u) = (self.region(b).lo, self.region(b).u);
        let cv = s.color_of(self.region(a).row_id(a_v)).expect("revealed");
        let cs = s.color_of(self.region(b).row_id(b_u)).expect("revealed");
        let base = 2 * self.t as i64 + 2;
        let inner = (a_hi - a_v) + (b_u - b_lo);
        let parity = |g: i64| (i_value(cv) + i_value(cs) + inner + g).rem_euclid(2);
        let g = if parity(base) != (target - 1).rem_euclid(2) { base } else { base + 1 };
        let mut right = self.regions[b].take().expect("live region");
        right.shift(0, a_hi + g - b_lo);
        let left = self.region_mut(a);
        for (cell, id) in right.frame.ids.drain() {
            let clash = left.frame.ids.insert(cell, id);
            debug_assert!(clash.is_none(), "regions overlap");
        }
        left.hi = right.hi;
        let (u, v, s_col, t_col) = (left.u, left.v, right.u, right.v);
        for c in a_hi + 1..a_hi + g {
            if !self.reveal_cell(s, a, (0, c))? {
                return Ok(None);
            }
        }
        let region = self.region(a);
        let mut best = (i64::MIN, 0, 0);
        for (x, y) in [(u, t_col), (t_col, u), (v, s_col), (s_col, v)] {
            let bv = b_of(s, &region.row_ids(x, y))?;
            if bv > best.0 {
                best = (bv, x, y);
            }
        }
        let region = self.region_mut(a);
        (region.b, region.u, region.v) = best;
        Ok(Some(a))
    }

    /// Binds every live region into an implicit grid. Region `main` goes to
    /// row `MID`, the rest to their own rows below it.
    fn commit(&self, main: Option<usize>) -> Result<(ImplicitGridHost, i64), AdversaryError> {
        let mut host = ImplicitGridHost::new(GRID_SIDE, GRID_SIDE)?;
        let min_col = self
            .regions
            .iter()
            .flatten()
            .flat_map(|r| r.frame.ids.keys().map(|&(_, c)| c))
            .min()
            .unwrap_or(0);
        let col0 = 2 - min_col;
        let spacing = 2 * self.t as i64 + 3;
        let mut next_row = MID + spacing;
        for (idx, region) in self.regions.iter().enumerate() {
            let Some(region) = region else { continue };
            let row0 = if Some(idx) == main {
                MID
            } else {
                let r = next_row;
                next_row += spacing;
                r
            };
            for (&(r, c), &id) in &region.frame.ids {
                let (i, j) = (row0 + r, col0 + c);
                if i < 1 || j < 1 {
                    return Err(AdversaryError::Precondition("region does not fit the host".into()));
                }
                host.bind(id, i as u64, j as u64)?;
            }
        }
        Ok((host, col0))
    }
}

fn check_path_pre(s: &LazySession<'_>, t: usize, target: u32) -> Result<(), AdversaryError> {
    if s.palette() > 3 {
        return Err(AdversaryError::Precondition(format!(
            "b-values need a palette of at most 3 colors, got {}",
            s.palette()
        )));
    }
    let fits = 5u64
        .checked_pow(target + 1)
        .and_then(|p| p.checked_mul(t.max(1) as u64))
        .is_some_and(|len| len < GRID_SIDE / 2);
    if !fits {
        return Err(AdversaryError::Precondition(format!(
            "5^({target}+1)·{t} does not fit the implicit host"
        )));
    }
    Ok(())
}

/// Forces a row path with b-value at least `target`.
#[derive(Debug, Clone)]
pub struct BPathAdversary {
    target: u32,
    result: Option<PathRegion>,
}

impl BPathAdversary {
    #[must_use]
    pub fn new(target: u32) -> Self {
        Self { target, result: None }
    }

    /// The path built by the last game, if the algorithm did not fail first.
    #[must_use]
    pub fn result(&self) -> Option<&PathRegion> {
        self.result.as_ref()
    }
}

fn path_region(
    builder: &PathBuilder,
    s: &LazySession<'_>,
    r: usize,
    col0: i64,
) -> PathRegion {
    let region = builder.region(r);
    let nodes = region.row_ids(region.u, region.v);
    let colors = nodes.iter().map(|&v| s.color_of(v).expect("revealed")).collect();
    let at = |c: i64| (MID as u64, (col0 + c) as u64);
    PathRegion {
        row: MID as u64,
        start: at(region.u),
        end: at(region.v),
        path: DirectedWalk::path(nodes).expect("row paths are non-empty"),
        b: region.b,
        region_length: (region.hi - region.lo) as u64 + 2 * builder.t as u64,
        colors,
    }
}

impl Adversary for BPathAdversary {
    fn name(&self) -> String {
        format!("bpath(target={})", self.target)
    }

    fn play(&mut self, s: &mut LazySession<'_>) -> Result<Commitment, AdversaryError> {
        let t = s.t();
        check_path_pre(s, t, self.target)?;
        let mut builder = PathBuilder::new(t);
        let main = builder.build(s, self.target)?;
        let (host, col0) = builder.commit(main)?;
        self.result = main.map(|r| path_region(&builder, s, r, col0));
        let details = match &self.result {
            Some(p) => json!({
                "target": self.target,
                "b": p.b,
                "region_length": p.region_length,
                "start": p.start,
                "end": p.end,
            }),
            None => json!({ "target": self.target, "short_circuit": true }),
        };
        Ok(Commitment {
            host: CommittedHost::Implicit(host),
            certificate: None,
            details,
        })
    }
}

/// Outcome of [`build_bvalue_path`].
#[derive(Debug, Clone)]
pub struct BPathRun {
    pub game: LazyGame,
    /// `None` when the algorithm failed before the path was finished.
    pub region: Option<PathRegion>,
}

/// Plays the recursive b-path strategy against `alg` with locality `t`.
pub fn build_bvalue_path(alg: &mut dyn OnlineAlgorithm, t: usize, target: u32) -> Result<BPathRun, EngineError> {
    let mut adv = BPathAdversary::new(target);
    let game = run_game_lazy(&mut adv, alg, t)?;
    Ok(BPathRun {
        game,
        region: adv.result,
    })
}

/// Closes a high-b row path into a grid cycle with nonzero b-value.
#[derive(Debug, Clone)]
pub struct RectangleAdversary {
    target: u32,
}

impl RectangleAdversary {
    #[must_use]
    pub fn new(target: u32) -> Self {
        Self { target }
    }
}

impl Adversary for RectangleAdversary {
    fn name(&self) -> String {
        format!("rectangle(target={})", self.target)
    }

    fn play(&mut self, s: &mut LazySession<'_>) -> Result<Commitment, AdversaryError> {
        let t = s.t();
        if u64::from(self.target) <= 4 * t as u64 + 4 {
            return Err(AdversaryError::Precondition(format!(
                "target {} must exceed 4T+4 = {}",
                self.target,
                4 * t + 4
            )));
        }
        check_path_pre(s, t, self.target)?;
        let mut builder = PathBuilder::new(t);
        let Some(r1) = builder.build(s, self.target)? else {
            let (host, _) = builder.commit(None)?;
            return Ok(short_circuit(host, "b-path"));
        };
        builder.region_mut(r1).orient();
        let (u, v, b_uv) = {
            let r = builder.region(r1);
            (r.u, r.v, r.b)
        };
        let width = v - u;
        let r2 = builder.fresh_region();
        for c in 0..=width {
            if !builder.reveal_cell(s, r2, (0, c))? {
                let (host, _) = builder.commit(Some(r1))?;
                return Ok(short_circuit(host, "second row"));
            }
        }
        let right_to_left = b_of(s, &builder.region(r2).row_ids(width, 0))?;
        let mirrored = right_to_left < 0;
        let gap = 2 * t as i64 + 2;
        let mut top = builder.regions[r2].take().expect("live region");
        if mirrored {
            top.mirror();
            top.shift(-gap, v);
        } else {
            top.shift(-gap, u);
        }
        let main = builder.region_mut(r1);
        for (cell, id) in top.frame.ids.drain() {
            main.frame.ids.insert(cell, id);
        }
        let column_up: Vec<(i64, i64)> = (1..gap).map(|d| (-d, v)).collect();
        let column_down: Vec<(i64, i64)> = (1..gap).rev().map(|d| (-d, u)).collect();
        for &cell in column_up.iter().chain(&column_down) {
            if !builder.reveal_cell(s, r1, cell)? {
                let (host, _) = builder.commit(Some(r1))?;
                return Ok(short_circuit(host, "connecting columns"));
            }
        }
        let ids = &builder.region(r1).frame.ids;
        let at = |cell: (i64, i64)| ids[&cell];
        let p_uv: Vec<NodeId> = (u..=v).map(|c| at((0, c))).collect();
        let p_vs: Vec<NodeId> = (0..=gap).map(|d| at((-d, v))).collect();
        let p_st: Vec<NodeId> = (u..=v).rev().map(|c| at((-gap, c))).collect();
        let p_tu: Vec<NodeId> = (0..=gap).rev().map(|d| at((-d, u))).collect();
        let parts = [
            b_of(s, &p_uv)?,
            b_of(s, &p_vs)?,
            b_of(s, &p_st)?,
            b_of(s, &p_tu)?,
        ];
        let mut cycle = p_uv.clone();
        cycle.extend(&p_vs[1..]);
        cycle.extend(&p_st[1..]);
        cycle.extend(&p_tu[1..p_tu.len() - 1]);
        let cycle = DirectedWalk::cycle(cycle)?;
        let (host, _) = builder.commit(Some(r1))?;
        let certificate = cycle_zero_certificate(&host, s.coloring(), &cycle)?.map(Certificate::GridCycle);
        Ok(Commitment {
            host: CommittedHost::Implicit(host),
            certificate,
            details: json!({
                "target": self.target,
                "b_uv": b_uv,
                "b_parts": parts,
                "b_cycle": parts.iter().sum::<i64>(),
                "second_row_mirrored": mirrored,
                "width": width,
            }),
        })
    }
}

fn short_circuit(host: ImplicitGridHost, phase: &str) -> Commitment {
    Commitment {
        host: CommittedHost::Implicit(host),
        certificate: None,
        details: json!({ "short_circuit": true, "phase": phase }),
    }
}

/// Plays the rectangle strategy against `alg` with locality `t`.
pub fn grid_rectangle_adversary(alg: &mut dyn OnlineAlgorithm, t: usize, target: u32) -> Result<LazyGame, EngineError> {
    run_game_lazy(&mut RectangleAdversary::new(target), alg, t)
}

// ---------------------------------------------------------------------------
// Torus

/// Colors two far-apart rows of an odd torus, then orients them so their
/// b-values cannot cancel.
#[derive(Debug, Clone)]
pub struct TorusAdversary {
    side: u64,
}

impl TorusAdversary {
    #[must_use]
    pub fn new(side: u64) -> Self {
        Self { side }
    }
}

impl Adversary for TorusAdversary {
    fn name(&self) -> String {
        format!("torus(side={})", self.side)
    }

    fn play(&mut self, s: &mut LazySession<'_>) -> Result<Commitment, AdversaryError> {
        let t = s.t() as u64;
        let side = self.side;
        if side.is_multiple_of(2) {
            return Err(AdversaryError::Precondition(format!("side {side} must be odd")));
        }
        if 4 * t + 4 > side {
            return Err(AdversaryError::Precondition(format!(
                "side {side} is smaller than 4T+4 = {}",
                4 * t + 4
            )));
        }
        if s.palette() > 3 {
            return Err(AdversaryError::Precondition("b-values need at most 3 colors".into()));
        }
        let ti = t as i64;
        let stride = side + 1;
        let patch_ids = (2 * t + 1) * stride;
        // Row stride side+1 keeps vertical and horizontal neighbors apart in id.
        let id_of = |p: u64, (r, c): (i64, u64)| p * patch_ids + (r + ti) as u64 * stride + c;
        let nbrs = |(r, c): (i64, u64)| {
            let left = if c == 1 { side } else { c - 1 };
            let right = if c == side { 1 } else { c + 1 };
            vec![(r - 1, c), (r + 1, c), (r, left), (r, right)]
        };
        let mut frames = [Frame::new(), Frame::new()];
        let mut alive = true;
        'outer: for (p, frame) in frames.iter_mut().enumerate() {
            for c in 1..=side {
                let update = frame.serve((0, c), t as usize, nbrs, |cell| id_of(p as u64, cell));
                if !reveal(s, id_of(p as u64, (0, c)), update)? {
                    alive = false;
                    break 'outer;
                }
            }
        }
        let row_b = |p: u64, dir: Direction| -> Result<i64, AdversaryError> {
            let mut cols: Vec<u64> = (1..=side).collect();
            if dir == Direction::Rev {
                cols.reverse();
            }
            let mut nodes: Vec<NodeId> = cols.iter().map(|&c| id_of(p, (0, c))).collect();
            nodes.push(nodes[0]);
            b_of(s, &nodes)
        };
        let (b1, b2_fwd) = if alive { (row_b(0, Direction::Fwd)?, row_b(1, Direction::Fwd)?) } else { (0, 0) };
        // Unmirrored, the second row read backwards has b = -b2_fwd.
        let mirrored = alive && b1 - b2_fwd == 0;
        let r1 = t + 1;
        let r2 = 3 * t + 3;
        let mut ids: Vec<Option<NodeId>> = vec![None; (side * side) as usize];
        let place = |i: u64, j: u64| ((i - 1) * side + (j - 1)) as usize;
        for (p, frame) in frames.iter().enumerate() {
            let centre = if p == 0 { r1 } else { r2 };
            for (&(r, c), &id) in &frame.ids {
                let col = if p == 1 && mirrored { side + 1 - c } else { c };
                ids[place((centre as i64 + r) as u64, col)] = Some(id);
            }
        }
        let mut next = 2 * patch_ids + 1;
        let ids: Vec<NodeId> = ids
            .into_iter()
            .map(|slot| {
                slot.unwrap_or_else(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let host = GridHost::with_ids(side, side, true, true, ids)?;
        let mut details = json!({ "side": side, "rows": [r1, r2], "second_row_mirrored": mirrored });
        let certificate = if alive {
            let c1 = row_cycle(&host, r1, Direction::Fwd)?;
            let c2 = row_cycle(&host, r2, Direction::Rev)?;
            let cert = crate::analysis::torus_pair_certificate(&host, s.coloring(), &c1, &c2)?;
            if let Some(TorusPairCertificate { b1, b2, .. }) = &cert {
                details["b1"] = json!(b1);
                details["b2"] = json!(b2);
            }
            cert.map(Certificate::TorusPair)
        } else {
            details["short_circuit"] = json!(true);
            None
        };
        Ok(Commitment {
            host: CommittedHost::Grid(host),
            certificate,
            details,
        })
    }
}

/// Plays the two-row torus strategy against `alg` with locality `t`.
pub fn torus_two_row_adversary(alg: &mut dyn OnlineAlgorithm, t: usize, side: u64) -> Result<LazyGame, EngineError> {
    run_game_lazy(&mut TorusAdversary::new(side), alg, t)
}

// ---------------------------------------------------------------------------
// Gadget chains

/// Colors the first and last gadget of a chain, transposes the gadgets near
/// the last one if both got the same class, then reveals everything else.
#[derive(Debug, Clone)]
pub struct GadgetAdversary {
    k: u64,
    n_prime: u64,
}

impl GadgetAdversary {
    #[must_use]
    pub fn new(k: u64, n_prime: u64) -> Self {
        Self { k, n_prime }
    }
}

fn same_kind(a: GadgetClass, b: GadgetClass) -> bool {
    matches!(
        (a, b),
        (GadgetClass::RowColorful { .. }, GadgetClass::RowColorful { .. })
            | (GadgetClass::ColumnColorful { .. }, GadgetClass::ColumnColorful { .. })
    )
}

impl Adversary for GadgetAdversary {
    fn name(&self) -> String {
        format!("gadget(k={}, n'={})", self.k, self.n_prime)
    }

    fn play(&mut self, s: &mut LazySession<'_>) -> Result<Commitment, AdversaryError> {
        let (k, n) = (self.k, self.n_prime);
        let t = s.t() as u64;
        let chain = GadgetChainHost::build(k, n)?;
        if n <= 2 * t + 2 {
            return Err(AdversaryError::Precondition(format!(
                "n' = {n} leaves the balls around the end gadgets adjacent for T = {t}"
            )));
        }
        let nbrs = |c: GadgetCoord| chain.coord_neighbors(c);
        let default_id = |c: GadgetCoord| chain.id_at(c).expect("in range");
        let mut frames = [Frame::new(), Frame::new()];
        let mut alive = true;
        'outer: for (frame, l) in frames.iter_mut().zip([1, n]) {
            for i in 1..=k {
                for j in 1..=k {
                    let update = frame.serve((l, i, j), t as usize, nbrs, default_id);
                    if !reveal(s, default_id((l, i, j)), update)? {
                        alive = false;
                        break 'outer;
                    }
                }
            }
        }
        let classes = if alive {
            Some((
                classify_gadget(&chain, 1, s.coloring())?,
                classify_gadget(&chain, n, s.coloring())?,
            ))
        } else {
            None
        };
        let transpose = classes.is_some_and(|(a, b)| same_kind(a, b));
        let near_end = n - t;
        let ids: Vec<NodeId> = (1..=k * k * n)
            .map(|p| {
                let (l, i, j) = chain.coord_of_position(p);
                if transpose && l >= near_end {
                    default_id((l, j, i))
                } else {
                    default_id((l, i, j))
                }
            })
            .collect();
        let host = GadgetChainHost::with_ids(k, n, ids)?;
        let mut seen: HashSet<Position> = HashSet::new();
        for frame in &frames {
            for &id in frame.ids.values() {
                seen.insert(host.position_of(id).expect("frame ids live in the host"));
            }
        }
        if alive {
            'rest: for l in 2..n {
                for id in host.gadget_ids(l) {
                    if s.is_revealed(id) {
                        continue;
                    }
                    let update = serve_host(&host, &mut seen, id, t as usize)?;
                    match s.reveal(id, update) {
                        Ok(_) => {}
                        Err(SessionError::GameOver) => break 'rest,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        let mut details = json!({ "k": k, "n_prime": n, "transposed": transpose });
        let mut certificate = None;
        if let Some((a, b)) = classes {
            details["first_class"] = json!(a);
            details["last_class_served"] = json!(b);
            let last = classify_gadget(&host, n, s.coloring())?;
            details["last_class"] = json!(last);
            let conflict = matches!(
                (a, last),
                (GadgetClass::RowColorful { .. }, GadgetClass::ColumnColorful { .. })
                    | (GadgetClass::ColumnColorful { .. }, GadgetClass::RowColorful { .. })
            );
            if conflict && u64::from(s.palette()) <= 2 * k - 2 {
                certificate = Some(Certificate::GadgetConflict(GadgetConflictCertificate {
                    first: (1, a),
                    second: (n, last),
                }));
            }
        }
        Ok(Commitment {
            host: CommittedHost::Gadget(host),
            certificate,
            details,
        })
    }
}

/// Plays the gadget-chain strategy against `alg` with locality `t`.
pub fn gadget_adversary(alg: &mut dyn OnlineAlgorithm, t: usize, k: u64, n_prime: u64) -> Result<LazyGame, EngineError> {
    run_game_lazy(&mut GadgetAdversary::new(k, n_prime), alg, t)
}

// ---------------------------------------------------------------------------
// Reduction

/// Colors `G_κ` with `κ+1` colors using an algorithm for `G_{κ+1}` with `κ+2`.
///
/// Duplicates follow the layered numbering: the duplicate of `x` is
/// `offset + x` where `offset = |G_κ|`. The inner algorithm sees the view of
/// `G_{κ+1}` derived from the view of `G_κ`, which is exact for locality ≥ 1.
pub struct ReductionWrapper<A> {
    inner: A,
    kappa: u32,
    offset: NodeId,
    sequence: Vec<NodeId>,
}

impl<A: OnlineAlgorithm> ReductionWrapper<A> {
    pub fn new(inner: A, kappa: u32, offset: NodeId) -> Result<Self, AlgorithmError> {
        if inner.palette() != kappa + 2 {
            return Err(AlgorithmError::Other(format!(
                "inner palette {} should be κ+2 = {}",
                inner.palette(),
                kappa + 2
            )));
        }
        Ok(Self {
            inner,
            kappa,
            offset,
            sequence: Vec::new(),
        })
    }

    #[must_use]
    pub fn inner(&self) -> &A {
        &self.inner
    }

    /// Calls the inner algorithm on `G_{κ+1}`, recording the reveal.
    fn ask(&mut self, node: NodeId, view: &LabeledGraph) -> Result<Color, AlgorithmError> {
        self.sequence.push(node);
        let i = self.sequence.len();
        self.inner.step(i, node, view, &self.sequence)
    }
}

/// The view of `G_{κ+1}` spanned by a view of `G_κ` and its duplicates.
#[must_use]
pub fn lift_view(view: &LabeledGraph, offset: NodeId) -> LabeledGraph {
    let mut g = view.clone();
    for x in view.nodes() {
        g.add_edge(x, offset + x).expect("distinct");
    }
    for (x, y) in view.edges() {
        g.add_edge(offset + x, y).expect("distinct");
        g.add_edge(offset + y, x).expect("distinct");
    }
    g
}

impl<A: OnlineAlgorithm> OnlineAlgorithm for ReductionWrapper<A> {
    fn name(&self) -> String {
        format!("reduction({})", self.inner.name())
    }
    fn palette(&self) -> Color {
        self.kappa + 1
    }
    fn step(
        &mut self,
        _i: usize,
        node: NodeId,
        view: &LabeledGraph,
        _sequence: &[NodeId],
    ) -> Result<Color, AlgorithmError> {
        let lifted = lift_view(view, self.offset);
        let top = self.kappa + 2;
        let c = self.ask(node, &lifted)?;
        if c < top {
            return Ok(c);
        }
        if c > top {
            return Err(AlgorithmError::Other(format!("inner color {c} exceeds {top}")));
        }
        let dup = self.offset + node;
        let c2 = self.ask(dup, &lifted)?;
        if c2 >= top {
            return Err(AlgorithmError::Other(format!(
                "inner algorithm failed: node {node} and its duplicate {dup} both got color {c2}"
            )));
        }
        Ok(c2)
    }
}
