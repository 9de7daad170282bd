//! Game runtime: serves views to an online algorithm, records the transcript,
//! audits lazily committed hosts and issues verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    classify_gadget, cycle_zero_certificate, torus_pair_certificate, AnalysisError, Certificate,
    GadgetClass,
};
use crate::graph_core::{Color, Coloring, GraphError, LabeledGraph, MonochromaticEdge, NodeId};
use crate::oracles::OracleError;
use crate::topologies::{
    host_ball, GadgetChainHost, GridGeometry, GridHost, HostGraph, ImplicitGridHost, Position,
    TopologyError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgorithmError {
    #[error("locality budget breach: {0}")]
    Breach(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Other(String),
}

/// A deterministic Online-LOCAL algorithm.
///
/// `step` is called once per revealed node with the discovered view so far;
/// any memory the algorithm keeps lives in `self`.
pub trait OnlineAlgorithm {
    fn name(&self) -> String;
    /// Colors are drawn from `1..=palette()`.
    fn palette(&self) -> Color;
    fn step(
        &mut self,
        i: usize,
        node: NodeId,
        view: &LabeledGraph,
        sequence: &[NodeId],
    ) -> Result<Color, AlgorithmError>;
}

impl<A: OnlineAlgorithm + ?Sized> OnlineAlgorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn palette(&self) -> Color {
        (**self).palette()
    }
    fn step(
        &mut self,
        i: usize,
        node: NodeId,
        view: &LabeledGraph,
        sequence: &[NodeId],
    ) -> Result<Color, AlgorithmError> {
        (**self).step(i, node, view, sequence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Concrete,
    Lazy,
}

/// One reveal, stored as the change to the served view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub i: usize,
    pub node: NodeId,
    pub added_nodes: Vec<NodeId>,
    pub added_edges: Vec<(NodeId, NodeId)>,
    pub removed_nodes: Vec<NodeId>,
    pub removed_edges: Vec<(NodeId, NodeId)>,
    /// 0 if the algorithm failed to produce a color.
    pub color: Color,
}

impl Step {
    #[must_use]
    pub fn is_monotone(&self) -> bool {
        self.removed_nodes.is_empty() && self.removed_edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub t: usize,
    pub mode: Mode,
    pub algorithm: String,
    pub palette: Color,
    pub steps: Vec<Step>,
    pub coloring: Coloring,
}

impl Transcript {
    #[must_use]
    pub fn sequence(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    /// Served views after each step, rebuilt from the deltas.
    pub fn views(&self) -> impl Iterator<Item = LabeledGraph> + '_ {
        let mut view = LabeledGraph::new();
        self.steps.iter().map(move |s| {
            apply_delta(&mut view, s);
            view.clone()
        })
    }

    #[must_use]
    pub fn final_view(&self) -> LabeledGraph {
        let mut view = LabeledGraph::new();
        for s in &self.steps {
            apply_delta(&mut view, s);
        }
        view
    }

    /// Writes the transcript as JSON with one full view per step.
    pub fn write_json<W: Write>(
        &self,
        result: Option<&GameResult>,
        mut w: W,
    ) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct JsonStep {
            i: usize,
            node: NodeId,
            view_nodes: Vec<NodeId>,
            view_edges: Vec<(NodeId, NodeId)>,
            color: Color,
        }
        write!(w, "{{\"T\":{},\"mode\":", self.t)?;
        serde_json::to_writer(&mut w, &self.mode)?;
        write!(w, ",\"steps\":[")?;
        for (idx, (s, view)) in self.steps.iter().zip(self.views()).enumerate() {
            if idx > 0 {
                write!(w, ",")?;
            }
            let row = JsonStep {
                i: s.i,
                node: s.node,
                view_nodes: view.nodes().collect(),
                view_edges: view.edges().collect(),
                color: s.color,
            };
            serde_json::to_writer(&mut w, &row)?;
        }
        write!(w, "],\"verdict\":")?;
        serde_json::to_writer(&mut w, &result)?;
        write!(w, "}}")?;
        Ok(())
    }

    #[must_use]
    pub fn to_json_string(&self, result: Option<&GameResult>) -> String {
        let mut buf = Vec::new();
        self.write_json(result, &mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

fn apply_delta(view: &mut LabeledGraph, s: &Step) {
    for &(u, v) in &s.removed_edges {
        view.remove_edge(u, v);
    }
    for &v in &s.removed_nodes {
        view.remove_node(v);
    }
    for &v in &s.added_nodes {
        view.add_node(v);
    }
    for &(u, v) in &s.added_edges {
        view.add_edge(u, v).expect("recorded edges are valid");
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossReason {
    MonochromaticEdge { edge: MonochromaticEdge },
    Certificate { certificate: Certificate },
    InvalidOutput { step: usize, node: NodeId, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    AlgorithmWins,
    AlgorithmLoses { reason: LossReason },
    Inconclusive,
}

impl Verdict {
    #[must_use]
    pub fn algorithm_loses(&self) -> bool {
        matches!(self, Verdict::AlgorithmLoses { .. })
    }

    #[must_use]
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::AlgorithmLoses {
                reason: LossReason::Certificate { certificate },
            } => Some(certificate),
            _ => None,
        }
    }

    #[must_use]
    pub fn monochromatic_edge(&self) -> Option<&MonochromaticEdge> {
        match self {
            Verdict::AlgorithmLoses {
                reason: LossReason::MonochromaticEdge { edge },
            } => Some(edge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Audit {
    Ok,
    Violation { step: usize, detail: String },
}

impl Audit {
    #[must_use]
    pub fn is_ok(&self) -> bool {
        matches!(self, Audit::Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    pub verdict: Verdict,
    pub audit: Audit,
    /// Why a certificate offered by the adversary was not accepted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_rejected: Option<String>,
}

/// Host an adversary commits to once the game is over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommittedHost {
    Graph(LabeledGraph),
    Grid(GridHost),
    Implicit(ImplicitGridHost),
    Gadget(GadgetChainHost),
}

/// Placement of a node in its committed host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Vertex(NodeId),
    Grid(u64, u64),
    Gadget(u64, u64, u64),
}

impl CommittedHost {
    /// Number of host nodes, or `None` for implicit hosts.
    #[must_use]
    pub fn node_count(&self) -> Option<usize> {
        match self {
            CommittedHost::Graph(g) => Some(g.node_count()),
            CommittedHost::Grid(g) => Some(g.node_count()),
            CommittedHost::Implicit(_) => None,
            CommittedHost::Gadget(g) => Some((g.k() * g.k() * g.gadget_count()) as usize),
        }
    }

    /// Id → coordinate for every bound id, sorted by id.
    #[must_use]
    pub fn embedding(&self) -> Vec<(NodeId, Coord)> {
        let mut out: Vec<(NodeId, Coord)> = match self {
            CommittedHost::Graph(g) => g.nodes().map(|v| (v, Coord::Vertex(v))).collect(),
            CommittedHost::Grid(g) => g.embedding().map(|(v, (i, j))| (v, Coord::Grid(i, j))).collect(),
            CommittedHost::Implicit(g) => g
                .embedding()
                .into_iter()
                .map(|(v, (i, j))| (v, Coord::Grid(i, j)))
                .collect(),
            CommittedHost::Gadget(g) => g
                .embedding()
                .map(|(v, (l, i, j))| (v, Coord::Gadget(l, i, j)))
                .collect(),
        };
        out.sort_unstable();
        out
    }

    fn as_host(&self) -> &dyn HostGraph {
        match self {
            CommittedHost::Graph(g) => g,
            CommittedHost::Grid(g) => g,
            CommittedHost::Implicit(g) => g,
            CommittedHost::Gadget(g) => g,
        }
    }
}

impl HostGraph for CommittedHost {
    fn has_position(&self, p: Position) -> bool {
        self.as_host().has_position(p)
    }
    fn neighbor_positions(&self, p: Position) -> Vec<Position> {
        self.as_host().neighbor_positions(p)
    }
    fn position_of(&self, id: NodeId) -> Option<Position> {
        self.as_host().position_of(id)
    }
    fn id_at_position(&self, p: Position) -> Option<NodeId> {
        self.as_host().id_at_position(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("node {0} was already revealed")]
    AlreadyRevealed(NodeId),
    #[error("revealed node {0} is not in the served view")]
    NotInView(NodeId),
    #[error("the algorithm failed; the game is over")]
    GameOver,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("reveal order is not a permutation of the host: {0}")]
    BadOrder(String),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How the served view changes just before a reveal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewUpdate {
    /// Add these nodes, then these edges.
    Extend {
        nodes: Vec<NodeId>,
        edges: Vec<(NodeId, NodeId)>,
    },
    /// Serve exactly this graph.
    Replace(LabeledGraph),
}

impl ViewUpdate {
    #[must_use]
    pub fn none() -> Self {
        ViewUpdate::Extend {
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }
}

/// One running game: owns the served view and drives the algorithm.
pub struct LazySession<'a> {
    alg: &'a mut dyn OnlineAlgorithm,
    t: usize,
    mode: Mode,
    view: LabeledGraph,
    sequence: Vec<NodeId>,
    revealed: BTreeSet<NodeId>,
    steps: Vec<Step>,
    coloring: Coloring,
    first_mono: Option<MonochromaticEdge>,
    failure: Option<LossReason>,
}

impl<'a> LazySession<'a> {
    pub fn new(alg: &'a mut dyn OnlineAlgorithm, t: usize) -> Self {
        Self::with_mode(alg, t, Mode::Lazy)
    }

    fn with_mode(alg: &'a mut dyn OnlineAlgorithm, t: usize, mode: Mode) -> Self {
        Self {
            alg,
            t,
            mode,
            view: LabeledGraph::new(),
            sequence: Vec::new(),
            revealed: BTreeSet::new(),
            steps: Vec::new(),
            coloring: Coloring::new(),
            first_mono: None,
            failure: None,
        }
    }

    #[must_use]
    pub fn t(&self) -> usize {
        self.t
    }

    #[must_use]
    pub fn palette(&self) -> Color {
        self.alg.palette()
    }

    #[must_use]
    pub fn view(&self) -> &LabeledGraph {
        &self.view
    }

    #[must_use]
    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    #[must_use]
    pub fn color_of(&self, v: NodeId) -> Option<Color> {
        self.coloring.get(v)
    }

    #[must_use]
    pub fn is_revealed(&self, v: NodeId) -> bool {
        self.revealed.contains(&v)
    }

    #[must_use]
    pub fn reveals(&self) -> usize {
        self.steps.len()
    }

    /// First monochromatic edge of the served view, if any.
    #[must_use]
    pub fn monochromatic(&self) -> Option<&MonochromaticEdge> {
        self.first_mono.as_ref()
    }

    #[must_use]
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Updates the view, reveals `node` and returns the algorithm's color.
    pub fn reveal(&mut self, node: NodeId, update: ViewUpdate) -> Result<Color, SessionError> {
        if self.failure.is_some() {
            return Err(SessionError::GameOver);
        }
        if self.revealed.contains(&node) {
            return Err(SessionError::AlreadyRevealed(node));
        }
        let mut step = Step {
            i: self.steps.len() + 1,
            node,
            added_nodes: Vec::new(),
            added_edges: Vec::new(),
            removed_nodes: Vec::new(),
            removed_edges: Vec::new(),
            color: 0,
        };
        match update {
            ViewUpdate::Extend { nodes, edges } => {
                for v in nodes {
                    if self.view.add_node(v) {
                        step.added_nodes.push(v);
                    }
                }
                for (u, v) in edges {
                    if self.view.add_edge(u, v)? {
                        step.added_edges.push((u.min(v), u.max(v)));
                    }
                }
            }
            ViewUpdate::Replace(g) => {
                let old = std::mem::replace(&mut self.view, g);
                step.removed_edges = old.edges().filter(|&(u, v)| !self.view.has_edge(u, v)).collect();
                step.removed_nodes = old.nodes().filter(|&v| !self.view.contains(v)).collect();
                step.added_nodes = self.view.nodes().filter(|&v| !old.contains(v)).collect();
                step.added_edges = self.view.edges().filter(|&(u, v)| !old.has_edge(u, v)).collect();
            }
        }
        step.added_nodes.sort_unstable();
        step.added_edges.sort_unstable();
        if !self.view.contains(node) {
            return Err(SessionError::NotInView(node));
        }
        for &(u, v) in &step.added_edges {
            self.note_edge(u, v);
        }
        self.sequence.push(node);
        self.revealed.insert(node);
        let i = step.i;
        let outcome = self.alg.step(i, node, &self.view, &self.sequence);
        let palette = self.alg.palette();
        match outcome {
            Ok(c) if (1..=palette).contains(&c) => {
                step.color = c;
                self.steps.push(step);
                self.coloring.set(node, c);
                let nbrs: Vec<NodeId> = self.view.neighbors(node).to_vec();
                for u in nbrs {
                    self.note_edge(node, u);
                }
                Ok(c)
            }
            Ok(c) => {
                step.color = c;
                self.steps.push(step);
                self.failure = Some(LossReason::InvalidOutput {
                    step: i,
                    node,
                    detail: format!("color {c} is outside the palette 1..={palette}"),
                });
                Err(SessionError::GameOver)
            }
            Err(e) => {
                self.steps.push(step);
                self.failure = Some(LossReason::InvalidOutput {
                    step: i,
                    node,
                    detail: e.to_string(),
                });
                Err(SessionError::GameOver)
            }
        }
    }

    fn note_edge(&mut self, u: NodeId, v: NodeId) {
        if self.first_mono.is_some() {
            return;
        }
        if let (Some(a), Some(b)) = (self.coloring.get(u), self.coloring.get(v)) {
            if a == b {
                self.first_mono = Some(MonochromaticEdge {
                    u: u.min(v),
                    v: u.max(v),
                    color: a,
                });
            }
        }
    }

    fn into_parts(self) -> (Transcript, Option<LossReason>) {
        let transcript = Transcript {
            t: self.t,
            mode: self.mode,
            algorithm: self.alg.name(),
            palette: self.alg.palette(),
            steps: self.steps,
            coloring: self.coloring,
        };
        (transcript, self.failure)
    }
}

/// What a lazy adversary hands over when it stops revealing.
#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    pub host: CommittedHost,
    pub certificate: Option<Certificate>,
    /// Adversary-specific measurements for reports.
    pub details: serde_json::Value,
}

pub trait Adversary {
    fn name(&self) -> String;
    /// Plays the game through `session` and commits a host at the end.
    fn play(&mut self, session: &mut LazySession<'_>) -> Result<Commitment, AdversaryError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub transcript: Transcript,
    pub result: GameResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LazyGame {
    pub transcript: Transcript,
    pub host: CommittedHost,
    pub result: GameResult,
    pub details: serde_json::Value,
}

/// Nodes and edges entering the view when `ball(v, t)` joins `seen`.
fn ball_delta(
    host: &LabeledGraph,
    seen: &BTreeSet<NodeId>,
    v: NodeId,
    t: usize,
) -> Result<(Vec<NodeId>, Vec<(NodeId, NodeId)>), GraphError> {
    let ball = host.ball_of(v, t)?;
    let fresh: Vec<NodeId> = ball.difference(seen).copied().collect();
    let fresh_set: BTreeSet<NodeId> = fresh.iter().copied().collect();
    let mut edges = Vec::new();
    for &x in &fresh {
        for &y in host.neighbors(x) {
            if seen.contains(&y) || (fresh_set.contains(&y) && x < y) {
                edges.push((x.min(y), x.max(y)));
            }
        }
    }
    Ok((fresh, edges))
}

/// Plays `order` on a fully known host with locality `t`.
pub fn run_game_concrete(
    host: &LabeledGraph,
    order: &[NodeId],
    alg: &mut dyn OnlineAlgorithm,
    t: usize,
) -> Result<Game, EngineError> {
    let order_set: BTreeSet<NodeId> = order.iter().copied().collect();
    if order_set.len() != order.len() {
        return Err(EngineError::BadOrder("repeated node".into()));
    }
    if order_set != host.node_set() {
        return Err(EngineError::BadOrder(format!(
            "{} nodes in order, {} in host",
            order.len(),
            host.node_count()
        )));
    }
    let mut session = LazySession::with_mode(alg, t, Mode::Concrete);
    let mut seen = BTreeSet::new();
    for &v in order {
        let (nodes, edges) = ball_delta(host, &seen, v, t)?;
        seen.extend(nodes.iter().copied());
        match session.reveal(v, ViewUpdate::Extend { nodes, edges }) {
            Ok(_) => {}
            Err(SessionError::GameOver) => break,
            Err(e) => return Err(e.into()),
        }
    }
    let (transcript, failure) = session.into_parts();
    let committed = CommittedHost::Graph(host.clone());
    let result = match failure {
        Some(reason) => GameResult {
            verdict: Verdict::AlgorithmLoses { reason },
            audit: Audit::Ok,
            certificate_rejected: None,
        },
        None => verdict(&transcript, &committed, None),
    };
    Ok(Game { transcript, result })
}

/// Plays a lazy adversary against `alg`, then audits and judges the game.
pub fn run_game_lazy(
    adv: &mut dyn Adversary,
    alg: &mut dyn OnlineAlgorithm,
    t: usize,
) -> Result<LazyGame, EngineError> {
    let mut session = LazySession::new(alg, t);
    let commitment = adv.play(&mut session)?;
    let (transcript, failure) = session.into_parts();
    let audit = audit_transcript(&transcript, &commitment.host);
    let result = if !audit.is_ok() {
        GameResult {
            verdict: Verdict::AlgorithmWins,
            audit,
            certificate_rejected: None,
        }
    } else if let Some(reason) = failure {
        GameResult {
            verdict: Verdict::AlgorithmLoses { reason },
            audit,
            certificate_rejected: None,
        }
    } else {
        verdict(&transcript, &commitment.host, commitment.certificate.as_ref())
    };
    Ok(LazyGame {
        transcript,
        host: commitment.host,
        result,
        details: commitment.details,
    })
}

/// Checks every served view against the union of host balls it should equal.
///
/// Compares each step's delta with the delta the host implies, which is
/// equivalent to comparing whole views since both start empty.
pub fn audit_transcript<H: HostGraph + ?Sized>(t: &Transcript, host: &H) -> Audit {
    let mut seen: BTreeMap<Position, NodeId> = BTreeMap::new();
    for s in &t.steps {
        let violation = |detail: String| Audit::Violation { step: s.i, detail };
        if !s.is_monotone() {
            return violation("served view shrank".into());
        }
        let Some(p) = host.position_of(s.node) else {
            return violation(format!("node {} is not in the committed host", s.node));
        };
        let ball = host_ball(host, &[p], t.t);
        let mut fresh: BTreeMap<Position, NodeId> = BTreeMap::new();
        for q in ball {
            if seen.contains_key(&q) {
                continue;
            }
            let Some(id) = host.id_at_position(q) else {
                return violation(format!("host position {q} in the ball has no id"));
            };
            fresh.insert(q, id);
        }
        let mut nodes: Vec<NodeId> = fresh.values().copied().collect();
        nodes.sort_unstable();
        if nodes != s.added_nodes {
            return violation(format!(
                "served {} new nodes, host implies {}",
                s.added_nodes.len(),
                nodes.len()
            ));
        }
        let mut edges = Vec::new();
        for (&q, &x) in &fresh {
            for r in host.neighbor_positions(q) {
                let other = seen.get(&r).or_else(|| fresh.get(&r).filter(|_| q < r));
                if let Some(&y) = other {
                    edges.push((x.min(y), x.max(y)));
                }
            }
        }
        edges.sort_unstable();
        if edges != s.added_edges {
            let missing = edges.iter().find(|e| s.added_edges.binary_search(e).is_err());
            let extra = s.added_edges.iter().find(|e| edges.binary_search(e).is_err());
            return violation(format!(
                "edge sets differ (host-only {missing:?}, served-only {extra:?})"
            ));
        }
        seen.extend(fresh);
    }
    Audit::Ok
}

/// Audit by recomputing each view from scratch on a materialized host.
#[must_use]
pub fn audit_full(t: &Transcript, host: &LabeledGraph) -> Audit {
    let mut balls: BTreeSet<NodeId> = BTreeSet::new();
    for (s, view) in t.steps.iter().zip(t.views()) {
        match host.ball_of(s.node, t.t) {
            Ok(b) => balls.extend(b),
            Err(e) => {
                return Audit::Violation {
                    step: s.i,
                    detail: e.to_string(),
                }
            }
        }
        let expected = host.induced_subgraph(&balls).expect("ball nodes are host nodes");
        if !crate::graph_core::views_equal(&expected, &view) {
            return Audit::Violation {
                step: s.i,
                detail: "served view differs from the host".into(),
            };
        }
    }
    Audit::Ok
}

/// First edge of `host` whose endpoints share a color.
fn host_monochromatic<H: HostGraph + ?Sized>(host: &H, col: &Coloring) -> Option<MonochromaticEdge> {
    for (v, c) in col.iter() {
        let Some(p) = host.position_of(v) else {
            continue;
        };
        for q in host.neighbor_positions(p) {
            if let Some(u) = host.id_at_position(q) {
                if u > v && col.get(u) == Some(c) {
                    return Some(MonochromaticEdge { u: v, v: u, color: c });
                }
            }
        }
    }
    None
}

/// Checks a certificate against the committed host and final coloring.
pub fn validate_certificate(
    cert: &Certificate,
    host: &CommittedHost,
    col: &Coloring,
    palette: Color,
) -> Result<(), String> {
    match (cert, host) {
        (Certificate::GridCycle(c), CommittedHost::Implicit(h)) => {
            check_cycle(h, col, &c.cycle, c.b)
        }
        (Certificate::GridCycle(c), CommittedHost::Grid(h)) => check_cycle(h, col, &c.cycle, c.b),
        (Certificate::TorusPair(c), CommittedHost::Grid(h)) => {
            match torus_pair_certificate(h, col, &c.c1, &c.c2).map_err(|e| e.to_string())? {
                Some(found) if found.b1 == c.b1 && found.b2 == c.b2 => Ok(()),
                Some(_) => Err("claimed b-values do not match".into()),
                None => Err("row cycles cancel".into()),
            }
        }
        (Certificate::GadgetConflict(c), CommittedHost::Gadget(h)) => {
            let budget = 2 * h.k() - 2;
            if u64::from(palette) > budget {
                return Err(format!(
                    "palette {palette} exceeds the {budget} colors the conflict rules out"
                ));
            }
            for (l, claimed) in [c.first, c.second] {
                let actual = classify_gadget(h, l, col).map_err(|e| e.to_string())?;
                if actual != claimed {
                    return Err(format!("gadget {l} is {actual:?}, not {claimed:?}"));
                }
            }
            let row_then_col = |a: GadgetClass, b: GadgetClass| {
                matches!(a, GadgetClass::RowColorful { .. })
                    && matches!(b, GadgetClass::ColumnColorful { .. })
            };
            if row_then_col(c.first.1, c.second.1) || row_then_col(c.second.1, c.first.1) {
                Ok(())
            } else {
                Err("gadget classes do not conflict".into())
            }
        }
        _ => Err(format!("{} certificate does not fit the committed host", cert.kind())),
    }
}

fn check_cycle<H: GridGeometry>(
    h: &H,
    col: &Coloring,
    cycle: &crate::graph_core::DirectedWalk,
    b: i64,
) -> Result<(), String> {
    match cycle_zero_certificate(h, col, cycle).map_err(|e| e.to_string())? {
        Some(found) if found.b == b => Ok(()),
        Some(_) => Err("claimed b-value does not match".into()),
        None => Err("cycle has b = 0".into()),
    }
}

/// Judges an audited game.
///
/// Monochromatic host edges lose outright; otherwise a valid certificate
/// loses; a full proper reveal wins; anything else is inconclusive.
#[must_use]
pub fn verdict(t: &Transcript, host: &CommittedHost, cert: Option<&Certificate>) -> GameResult {
    let col = &t.coloring;
    if let Some(edge) = host_monochromatic(host, col) {
        return GameResult {
            verdict: Verdict::AlgorithmLoses {
                reason: LossReason::MonochromaticEdge { edge },
            },
            audit: Audit::Ok,
            certificate_rejected: None,
        };
    }
    let mut rejected = None;
    if let Some(c) = cert {
        match validate_certificate(c, host, col, t.palette) {
            Ok(()) => {
                return GameResult {
                    verdict: Verdict::AlgorithmLoses {
                        reason: LossReason::Certificate {
                            certificate: c.clone(),
                        },
                    },
                    audit: Audit::Ok,
                    certificate_rejected: None,
                }
            }
            Err(why) => rejected = Some(why),
        }
    }
    let full = host.node_count() == Some(col.len());
    GameResult {
        verdict: if full {
            Verdict::AlgorithmWins
        } else {
            Verdict::Inconclusive
        },
        audit: Audit::Ok,
        certificate_rejected: rejected,
    }
}

/// Re-runs a fresh algorithm on the transcript's views alone and reports
/// whether every color matches.
pub fn replay_matches(t: &Transcript, alg: &mut dyn OnlineAlgorithm) -> bool {
    let sequence = t.sequence();
    for (idx, (s, view)) in t.steps.iter().zip(t.views()).enumerate() {
        match alg.step(s.i, s.node, &view, &sequence[..=idx]) {
            Ok(c) if c == s.color => {}
            Err(_) if s.color == 0 => {}
            _ => return false,
        }
    }
    true
}

/// Reveal order helpers shared by the CLI and tests.
pub mod orders {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::graph_core::{LabeledGraph, NodeId};

    #[must_use]
    pub fn by_id(g: &LabeledGraph) -> Vec<NodeId> {
        g.nodes().collect()
    }

    #[must_use]
    pub fn shuffled(g: &LabeledGraph, seed: u64) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = g.nodes().collect();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(Color);

    impl OnlineAlgorithm for Constant {
        fn name(&self) -> String {
            "constant".into()
        }
        fn palette(&self) -> Color {
            3
        }
        fn step(&mut self, _: usize, _: NodeId, _: &LabeledGraph, _: &[NodeId]) -> Result<Color, AlgorithmError> {
            Ok(self.0)
        }
    }

    fn triangle() -> LabeledGraph {
        LabeledGraph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn constant_loses_on_triangle() {
        let g = run_game_concrete(&triangle(), &[1, 2, 3], &mut Constant(1), 1).unwrap();
        assert!(g.result.verdict.monochromatic_edge().is_some());
        assert_eq!(audit_transcript(&g.transcript, &triangle()), Audit::Ok);
    }

    #[test]
    fn out_of_palette_is_invalid_output() {
        let g = run_game_concrete(&triangle(), &[1, 2, 3], &mut Constant(7), 1).unwrap();
        assert!(matches!(
            g.result.verdict,
            Verdict::AlgorithmLoses {
                reason: LossReason::InvalidOutput { step: 1, .. }
            }
        ));
        assert_eq!(g.transcript.steps.len(), 1);
    }

    #[test]
    fn order_must_be_permutation() {
        assert!(matches!(
            run_game_concrete(&triangle(), &[1, 2], &mut Constant(1), 1),
            Err(EngineError::BadOrder(_))
        ));
        assert!(matches!(
            run_game_concrete(&triangle(), &[1, 2, 2], &mut Constant(1), 1),
            Err(EngineError::BadOrder(_))
        ));
    }

    #[test]
    fn views_follow_balls() {
        let path = LabeledGraph::from_edges([(1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let g = run_game_concrete(&path, &[1, 5, 3, 2, 4], &mut Constant(1), 1).unwrap();
        let views: Vec<_> = g.transcript.views().collect();
        assert_eq!(views[0].node_set(), [1, 2].into_iter().collect());
        assert_eq!(views[1].node_set(), [1, 2, 4, 5].into_iter().collect());
        assert_eq!(views[1].edge_count(), 2);
        assert_eq!(views[2].edge_count(), 4);
        assert_eq!(audit_full(&g.transcript, &path), Audit::Ok);
        assert_eq!(audit_transcript(&g.transcript, &path), Audit::Ok);
    }

    #[test]
    fn audit_flags_missing_edge() {
        let path = LabeledGraph::from_edges([(1, 2), (2, 3)]).unwrap();
        let mut g = run_game_concrete(&path, &[1, 2, 3], &mut Constant(1), 1).unwrap();
        g.transcript.steps[1].added_edges.clear();
        assert!(matches!(
            audit_transcript(&g.transcript, &path),
            Audit::Violation { step: 2, .. }
        ));
    }

    struct Contradictory;

    impl Adversary for Contradictory {
        fn name(&self) -> String {
            "contradictory".into()
        }
        fn play(&mut self, s: &mut LazySession<'_>) -> Result<Commitment, AdversaryError> {
            s.reveal(1, ViewUpdate::Extend { nodes: vec![1, 2], edges: vec![(1, 2)] })?;
            let mut g = LabeledGraph::new();
            g.add_node(1);
            g.add_node(3);
            s.reveal(3, ViewUpdate::Replace(g))?;
            Ok(Commitment {
                host: CommittedHost::Graph(LabeledGraph::from_edges([(1, 2), (2, 3)]).unwrap()),
                certificate: None,
                details: serde_json::Value::Null,
            })
        }
    }

    #[test]
    fn contradictory_adversary_forfeits() {
        let game = run_game_lazy(&mut Contradictory, &mut Constant(1), 1).unwrap();
        assert!(matches!(game.result.audit, Audit::Violation { step: 2, .. }));
        assert_eq!(game.result.verdict, Verdict::AlgorithmWins);
    }

    #[test]
    fn json_shape() {
        let edge = LabeledGraph::from_edges([(1, 2)]).unwrap();
        let g = run_game_concrete(&edge, &[2, 1], &mut Constant(1), 0).unwrap();
        let s = g.transcript.to_json_string(Some(&g.result));
        assert!(s.starts_with(r#"{"T":0,"mode":"concrete","steps":[{"i":1,"node":2,"view_nodes":[2],"view_edges":[],"color":1}"#), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["verdict"]["verdict"]["outcome"], "algorithm_loses");
    }
}
