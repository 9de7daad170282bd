//! The (k+1)-coloring algorithm for graphs whose k-coloring is locally
//! inferable: groups of seen nodes carry a type, and clashing types are
//! reconciled by color swaps that use color k+1 as scratch space.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::engine::{AlgorithmError, OnlineAlgorithm};
use crate::graph_core::{Color, Coloring, LabeledGraph, NodeId};
use crate::oracles::{oracle_partition, OracleConfig};

pub type GroupId = usize;

/// A connected component of the seen region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    nodes: BTreeSet<NodeId>,
    /// Oracle part of each node, labels `0..k`.
    labels: HashMap<NodeId, usize>,
    /// Color of each part label.
    pi: Vec<Color>,
}

impl Group {
    #[must_use]
    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    #[must_use]
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    #[must_use]
    pub fn label(&self, v: NodeId) -> Option<usize> {
        self.labels.get(&v).copied()
    }

    /// The type: color of each part.
    #[must_use]
    pub fn pi(&self) -> &[Color] {
        &self.pi
    }

    fn min_id(&self) -> NodeId {
        *self.nodes.first().expect("groups are non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MergeEvent {
    pub old_size: usize,
    pub new_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UnifyStats {
    pub case_counts: [usize; 3],
    pub oracle_calls: usize,
    pub swaps: usize,
    pub max_type_changes: u32,
    pub merge_events: Vec<MergeEvent>,
}

/// Color-swap schedule that turns `from` into `to`, as pairs of colors.
#[must_use]
pub fn swap_schedule(from: &[Color], to: &[Color]) -> Vec<(Color, Color)> {
    let mut cur = from.to_vec();
    let mut out = Vec::new();
    for s in 0..cur.len() {
        if cur[s] != to[s] {
            let (a, b) = (cur[s], to[s]);
            out.push((a, b));
            for c in &mut cur {
                if *c == a {
                    *c = b;
                } else if *c == b {
                    *c = a;
                }
            }
        }
    }
    out
}

/// `3(k-1)·⌈log2 n⌉`.
#[must_use]
pub fn default_t(k: u32, n: usize) -> usize {
    let log = if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize };
    3 * (k as usize - 1) * log
}

#[derive(Debug, Clone)]
pub struct UnifyColor {
    cfg: OracleConfig,
    t: usize,
    log_n: u32,
    seen: HashSet<NodeId>,
    /// Nodes whose whole neighborhood is inside every later view.
    visible: HashSet<NodeId>,
    groups: BTreeMap<GroupId, Group>,
    group_of: HashMap<NodeId, GroupId>,
    next_group: GroupId,
    committed: Coloring,
    type_changes: HashMap<NodeId, u32>,
    stats: UnifyStats,
    check_invariants: bool,
}

impl UnifyColor {
    /// Algorithm for `n`-node hosts with the default inner locality.
    pub fn new(cfg: OracleConfig, n: usize) -> Result<Self, AlgorithmError> {
        Self::with_t(cfg, n, default_t(cfg.k, n))
    }

    /// Algorithm with an explicit inner locality `t`.
    pub fn with_t(cfg: OracleConfig, n: usize, t: usize) -> Result<Self, AlgorithmError> {
        cfg.validate()?;
        if cfg.k < 2 {
            return Err(AlgorithmError::Other("k must be at least 2".into()));
        }
        let log_n = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() };
        Ok(Self {
            cfg,
            t,
            log_n,
            seen: HashSet::new(),
            visible: HashSet::new(),
            groups: BTreeMap::new(),
            group_of: HashMap::new(),
            next_group: 0,
            committed: Coloring::new(),
            type_changes: HashMap::new(),
            stats: UnifyStats::default(),
            check_invariants: false,
        })
    }

    /// Verifies the frontier hypothesis and properness after every reveal.
    #[must_use]
    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    #[must_use]
    pub fn k(&self) -> u32 {
        self.cfg.k
    }

    /// Inner locality `T`.
    #[must_use]
    pub fn inner_t(&self) -> usize {
        self.t
    }

    /// Locality the engine must grant: `T + ℓ`.
    #[must_use]
    pub fn locality(&self) -> usize {
        self.t + self.cfg.ell
    }

    /// `⌈log2 n⌉`, the bound on per-node type changes.
    #[must_use]
    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    #[must_use]
    pub fn stats(&self) -> &UnifyStats {
        &self.stats
    }

    #[must_use]
    pub fn committed(&self) -> &Coloring {
        &self.committed
    }

    #[must_use]
    pub fn type_changes(&self, v: NodeId) -> u32 {
        self.type_changes.get(&v).copied().unwrap_or(0)
    }

    #[must_use]
    pub fn group_of(&self, v: NodeId) -> Option<GroupId> {
        self.group_of.get(&v).copied()
    }

    #[must_use]
    pub fn group(&self, g: GroupId) -> Option<&Group> {
        self.groups.get(&g)
    }

    pub fn groups(&self) -> impl Iterator<Item = (GroupId, &Group)> {
        self.groups.iter().map(|(&g, grp)| (g, grp))
    }

    fn breach(msg: String) -> AlgorithmError {
        AlgorithmError::Breach(msg)
    }

    /// Handles the reveal of `u` and returns its color.
    pub fn on_reveal(&mut self, u: NodeId, view: &LabeledGraph) -> Result<Color, AlgorithmError> {
        if !view.contains(u) {
            return Err(AlgorithmError::Other(format!("revealed node {u} is not in the view")));
        }
        let reach = (self.t + 1).max((self.t + self.cfg.ell).saturating_sub(1));
        let dist = view.distances_from(&BTreeSet::from([u]), reach).expect("u is in the view");
        let ball_t: BTreeSet<NodeId> = dist
            .iter()
            .filter(|&(_, &d)| d <= self.t)
            .map(|(&v, _)| v)
            .collect();
        let vis_r = (self.t + self.cfg.ell).checked_sub(1);
        if let Some(r) = vis_r {
            self.visible
                .extend(dist.iter().filter(|&(_, &d)| d <= r).map(|(&v, _)| v));
        }

        if !ball_t.iter().all(|v| self.seen.contains(v)) {
            let mut touching: Vec<GroupId> = dist
                .iter()
                .filter(|&(_, &d)| d <= self.t + 1)
                .filter_map(|(v, _)| self.group_of.get(v).copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let case = match touching.len() {
                0 => 0,
                1 => 1,
                _ => 2,
            };
            self.stats.case_counts[case] += 1;
            self.seen.extend(ball_t.iter().copied());
            let mut union = ball_t.clone();
            for g in &touching {
                union.extend(self.groups[g].nodes.iter().copied());
            }
            let labels = self.query(view, &union)?;
            if touching.is_empty() {
                let mut pi = vec![0; self.cfg.k as usize];
                let lu = labels[&u];
                pi[lu] = 1;
                let mut next = 2;
                for (s, c) in pi.iter_mut().enumerate() {
                    if s != lu {
                        *c = next;
                        next += 1;
                    }
                }
                let gid = self.fresh_group(union, labels, pi);
                self.committed.set(u, 1);
                debug_assert_eq!(self.groups[&gid].pi[self.groups[&gid].labels[&u]], 1);
            } else {
                touching.sort_by_key(|g| {
                    let grp = &self.groups[g];
                    (std::cmp::Reverse(grp.size()), grp.min_id())
                });
                for &g in &touching {
                    self.relabel(g, &labels)?;
                }
                let target = self.groups[&touching[0]].pi.clone();
                let new_size = union.len();
                for &x in &touching[1..] {
                    let old_size = self.groups[&x].size();
                    if self.unify_type(x, &target, view)? > 0 {
                        self.stats.merge_events.push(MergeEvent { old_size, new_size });
                    }
                }
                for g in &touching {
                    self.groups.remove(g);
                }
                self.fresh_group(union, labels, target);
            }
        } else {
            self.stats.case_counts[1] += 1;
        }

        let gid = self.group_of[&u];
        let c = match self.committed.get(u) {
            Some(c) => c,
            None => {
                let grp = &self.groups[&gid];
                let c = grp.pi[grp.labels[&u]];
                self.committed.set(u, c);
                c
            }
        };
        if self.check_invariants {
            self.verify(view)?;
        }
        Ok(c)
    }

    fn query(
        &mut self,
        view: &LabeledGraph,
        union: &BTreeSet<NodeId>,
    ) -> Result<HashMap<NodeId, usize>, AlgorithmError> {
        self.stats.oracle_calls += 1;
        let p = oracle_partition(&self.cfg, view, union)?;
        let mut labels = HashMap::with_capacity(union.len());
        for (s, part) in p.parts.iter().enumerate() {
            for &v in part {
                labels.insert(v, s);
            }
        }
        Ok(labels)
    }

    fn fresh_group(
        &mut self,
        nodes: BTreeSet<NodeId>,
        labels: HashMap<NodeId, usize>,
        pi: Vec<Color>,
    ) -> GroupId {
        let gid = self.next_group;
        self.next_group += 1;
        for &v in &nodes {
            self.group_of.insert(v, gid);
        }
        self.groups.insert(gid, Group { nodes, labels, pi });
        gid
    }

    /// Rewrites a group's labels and type in terms of a new partition.
    ///
    /// Parts the group does not meet take the unused colors, ascending.
    fn relabel(&mut self, g: GroupId, labels: &HashMap<NodeId, usize>) -> Result<(), AlgorithmError> {
        let k = self.cfg.k as usize;
        let grp = self.groups.get_mut(&g).expect("live group");
        let mut map: Vec<Option<usize>> = vec![None; k];
        let mut back: Vec<Option<usize>> = vec![None; k];
        for &v in &grp.nodes {
            let old = grp.labels[&v];
            let new = labels[&v];
            match (map[old], back[new]) {
                (None, None) => {
                    map[old] = Some(new);
                    back[new] = Some(old);
                }
                (Some(a), Some(b)) if a == new && b == old => {}
                _ => {
                    return Err(AlgorithmError::Other(
                        "oracle partitions of overlapping sets disagree".into(),
                    ))
                }
            }
        }
        let mut pi = vec![0; k];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                pi[*new] = grp.pi[old];
            }
        }
        let spare: Vec<Color> = (1..=k as Color).filter(|c| !pi.contains(c)).collect();
        let mut unused = spare.into_iter();
        for c in &mut pi {
            if *c == 0 {
                *c = unused.next().expect("k colors for k parts");
            }
        }
        grp.pi = pi;
        grp.labels = grp.nodes.iter().map(|&v| (v, labels[&v])).collect();
        Ok(())
    }

    /// Changes the type of group `x` to `target` by color swaps.
    pub fn unify_type(
        &mut self,
        x: GroupId,
        target: &[Color],
        view: &LabeledGraph,
    ) -> Result<usize, AlgorithmError> {
        let plan = swap_schedule(&self.groups[&x].pi, target);
        for &(a, b) in &plan {
            self.swap_colors(x, a, b, view)?;
        }
        if !plan.is_empty() {
            let grp = &self.groups[&x];
            for &v in &grp.nodes {
                let c = self.type_changes.entry(v).or_insert(0);
                *c += 1;
                self.stats.max_type_changes = self.stats.max_type_changes.max(*c);
            }
        }
        Ok(plan.len())
    }

    /// Swaps colors `i1` and `i2` in the type of group `x`.
    pub fn swap_colors(
        &mut self,
        x: GroupId,
        i1: Color,
        i2: Color,
        view: &LabeledGraph,
    ) -> Result<(), AlgorithmError> {
        let k = self.cfg.k;
        if i1 == i2 || !(1..=k).contains(&i1) || !(1..=k).contains(&i2) {
            return Err(AlgorithmError::Other(format!("cannot swap colors {i1} and {i2}")));
        }
        let mut frontier = self.committed_in(x);
        self.change_index(x, &mut frontier, i1, k + 1, view)?;
        self.change_index(x, &mut frontier, i2, i1, view)?;
        self.change_index(x, &mut frontier, k + 1, i2, view)?;
        self.stats.swaps += 1;
        Ok(())
    }

    fn committed_in(&self, x: GroupId) -> BTreeSet<NodeId> {
        self.groups[&x]
            .nodes
            .iter()
            .copied()
            .filter(|&v| self.committed.is_colored(v))
            .collect()
    }

    /// Replaces color `i` by `j` in the type of `x`, committing one layer
    /// around `frontier` and growing it by that layer.
    pub fn change_index(
        &mut self,
        x: GroupId,
        frontier: &mut BTreeSet<NodeId>,
        i: Color,
        j: Color,
        view: &LabeledGraph,
    ) -> Result<(), AlgorithmError> {
        let grp = self.groups.get(&x).expect("live group");
        if !grp.pi.contains(&i) || grp.pi.contains(&j) {
            return Err(AlgorithmError::Other(format!(
                "change_index({i}, {j}) needs {i} in the type and {j} outside it"
            )));
        }
        let mut ring = BTreeSet::new();
        for &v in frontier.iter() {
            if !self.visible.contains(&v) {
                return Err(Self::breach(format!(
                    "committed node {v} may have neighbors outside the view"
                )));
            }
            for &w in view.neighbors(v) {
                if !frontier.contains(&w) {
                    ring.insert(w);
                }
            }
        }
        for &w in &ring {
            if !grp.nodes.contains(&w) {
                return Err(Self::breach(format!("node {w} lies outside the group")));
            }
        }
        let grp = self.groups.get_mut(&x).expect("live group");
        for &w in &ring {
            let s = grp.labels[&w];
            let c = if grp.pi[s] == i { j } else { grp.pi[s] };
            self.committed.set(w, c);
        }
        for c in &mut grp.pi {
            if *c == i {
                *c = j;
            }
        }
        frontier.extend(ring);
        Ok(())
    }

    /// Parity flip for `k = 2`: commits neighbors of 1-nodes to 2, then
    /// neighbors of 2-nodes to 3, then neighbors of 3-nodes to 1.
    pub fn flip_parity(&mut self, x: GroupId, view: &LabeledGraph) -> Result<(), AlgorithmError> {
        if self.cfg.k != 2 {
            return Err(AlgorithmError::Other("parity flips need k = 2".into()));
        }
        for (from, to) in [(1, 2), (2, 3), (3, 1)] {
            let grp = &self.groups[&x];
            let sources: Vec<NodeId> = grp
                .nodes
                .iter()
                .copied()
                .filter(|&v| self.committed.get(v) == Some(from))
                .collect();
            let mut layer = BTreeSet::new();
            for v in sources {
                if !self.visible.contains(&v) {
                    return Err(Self::breach(format!(
                        "committed node {v} may have neighbors outside the view"
                    )));
                }
                for &w in view.neighbors(v) {
                    if !self.committed.is_colored(w) {
                        if !grp.nodes.contains(&w) {
                            return Err(Self::breach(format!("node {w} lies outside the group")));
                        }
                        layer.insert(w);
                    }
                }
            }
            for w in layer {
                self.committed.set(w, to);
            }
        }
        let grp = self.groups.get_mut(&x).expect("live group");
        for c in &mut grp.pi {
            *c = 3 - *c;
        }
        Ok(())
    }

    /// Frontier hypothesis and properness of committed colors in `view`.
    pub fn verify(&self, view: &LabeledGraph) -> Result<(), AlgorithmError> {
        for (v, c) in self.committed.iter() {
            let Some(&g) = self.group_of.get(&v) else {
                return Err(AlgorithmError::Other(format!("committed node {v} has no group")));
            };
            let grp = &self.groups[&g];
            let mut open = false;
            for &w in view.neighbors(v) {
                match self.committed.get(w) {
                    Some(d) if d == c => {
                        return Err(AlgorithmError::Other(format!(
                            "committed edge {v}-{w} is monochromatic"
                        )))
                    }
                    Some(_) => {}
                    None => open = true,
                }
            }
            if open && grp.pi[grp.labels[&v]] != c {
                return Err(AlgorithmError::Other(format!(
                    "frontier node {v} has color {c}, type says {}",
                    grp.pi[grp.labels[&v]]
                )));
            }
        }
        Ok(())
    }
}

impl OnlineAlgorithm for UnifyColor {
    fn name(&self) -> String {
        "unify-color".into()
    }

    fn palette(&self) -> Color {
        self.cfg.k + 1
    }

    fn step(
        &mut self,
        _i: usize,
        node: NodeId,
        view: &LabeledGraph,
        _sequence: &[NodeId],
    ) -> Result<Color, AlgorithmError> {
        self.on_reveal(node, view)
    }
}
