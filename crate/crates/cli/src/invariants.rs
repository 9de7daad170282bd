use std::collections::BTreeSet;
use std::ops::ControlFlow;

use clap::ValueEnum;
use colorlab::analysis::{
    a_value, b_value, check_locally_inferable, check_parity, classify_gadget, for_each_coloring,
    for_each_simple_path, simple_cycles, GadgetClass, Inferability, ParityCheck,
};
use colorlab::topologies::{row_cycle, AttachRule, Direction, GadgetChainHost, GridHost, KTreeHost, LayeredHost, TriangularGridHost};
use colorlab::{Coloring, DirectedWalk, LabeledGraph, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Bvalue,
    Gadget,
    Inferable,
    Layered,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lemma_id: &'static str,
    pub instances_checked: u64,
    pub violations: u64,
}

#[derive(Default)]
struct Tally {
    checked: u64,
    violations: u64,
}

impl Tally {
    fn check(&mut self, ok: bool) {
        self.checked += 1;
        self.violations += u64::from(!ok);
    }

    fn report(self, lemma_id: &'static str) -> LemmaReport {
        LemmaReport {
            lemma_id,
            instances_checked: self.checked,
            violations: self.violations,
        }
    }
}

fn grid(a: u64, b: u64) -> LabeledGraph {
    GridHost::build(a, b, false, false).expect("small grid").graph()
}

fn antisymmetry() -> LemmaReport {
    let mut t = Tally::default();
    for x in 1..=3 {
        for y in 1..=3 {
            t.check(matches!((a_value(x, y), a_value(y, x)), (Ok(p), Ok(q)) if p + q == 0));
        }
    }
    t.report("a_antisymmetry")
}

fn length_bound(rng: &mut ChaCha8Rng) -> LemmaReport {
    let mut t = Tally::default();
    for _ in 0..2_000 {
        let len = rng.gen_range(1..40u64);
        let col: Coloring = (1..=len).map(|v| (v, rng.gen_range(1..=3))).collect();
        let walk = DirectedWalk::path((1..=len).collect()).expect("non-empty");
        let ok = match (b_value(&col, &walk), b_value(&col, &walk.reversed())) {
            (Ok(b), Ok(r)) => b.unsigned_abs() as usize <= walk.len() && r == -b,
            _ => false,
        };
        t.check(ok);
    }
    t.report("b_length_bound")
}

fn grid_cycles_and_paths() -> [LemmaReport; 2] {
    let mut cycles_t = Tally::default();
    let mut paths_t = Tally::default();
    for (a, b) in [(3, 3), (3, 4)] {
        let g = grid(a, b);
        let cycles: Vec<DirectedWalk> = simple_cycles(&g)
            .into_iter()
            .flat_map(|c| {
                let w = DirectedWalk::cycle(c).expect("grid cycles have length ≥ 4");
                [w.reversed(), w]
            })
            .collect();
        let mut paths = Vec::new();
        for_each_simple_path(&g, |p| paths.push(DirectedWalk::path(p.to_vec()).expect("non-empty")));
        let _ = for_each_coloring(&g, 3, |col| {
            for c in &cycles {
                cycles_t.check(b_value(col, c) == Ok(0));
            }
            for p in &paths {
                paths_t.check(check_parity(col, p) == Ok(ParityCheck::Ok));
            }
            ControlFlow::Continue(())
        });
    }
    let path7 = LabeledGraph::from_edges((1..7).map(|i| (i, i + 1))).expect("path");
    let walk = DirectedWalk::path((1..=7).collect()).expect("non-empty");
    let _ = for_each_coloring(&path7, 3, |col| {
        for w in [&walk, &walk.reversed()] {
            paths_t.check(check_parity(col, w) == Ok(ParityCheck::Ok));
        }
        ControlFlow::Continue(())
    });
    [cycles_t.report("grid_cycle_zero"), paths_t.report("path_parity")]
}

fn odd_rows() -> LemmaReport {
    let mut t = Tally::default();
    let host = GridHost::build(3, 5, false, true).expect("cylinder");
    let g = host.graph();
    let rows: Vec<(DirectedWalk, DirectedWalk)> = (1..=3)
        .map(|i| {
            let f = row_cycle(&host, i, Direction::Fwd).expect("row");
            let r = row_cycle(&host, i, Direction::Rev).expect("row");
            (f, r)
        })
        .collect();
    let _ = for_each_coloring(&g, 3, |col| {
        for (f, r) in &rows {
            let ok = match (b_value(col, f), b_value(col, r)) {
                (Ok(x), Ok(y)) => x.rem_euclid(2) == 1 && x + y == 0,
                _ => false,
            };
            t.check(ok);
        }
        ControlFlow::Continue(())
    });
    t.report("odd_cycle_b_odd")
}

fn is_row(c: GadgetClass) -> bool {
    matches!(c, GadgetClass::RowColorful { .. })
}

fn gadget_suite() -> Vec<LemmaReport> {
    let mut single = Tally::default();
    let chain = GadgetChainHost::build(3, 1).expect("gadget");
    let _ = for_each_coloring(&chain.graph(), 4, |col| {
        let class = classify_gadget(&chain, 1, col);
        single.check(matches!(
            class,
            Ok(GadgetClass::RowColorful { .. } | GadgetClass::ColumnColorful { .. })
        ));
        ControlFlow::Continue(())
    });
    let mut pair = Tally::default();
    let chain = GadgetChainHost::build(3, 2).expect("gadget chain");
    let _ = for_each_coloring(&chain.graph(), 4, |col| {
        let ok = match (classify_gadget(&chain, 1, col), classify_gadget(&chain, 2, col)) {
            (Ok(x), Ok(y)) => is_row(x) == is_row(y),
            _ => false,
        };
        pair.check(ok);
        ControlFlow::Continue(())
    });
    vec![single.report("gadget_dichotomy"), pair.report("gadget_chain_consistency")]
}

fn connected_sample(g: &LabeledGraph, size: usize, rng: &mut ChaCha8Rng) -> BTreeSet<NodeId> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let mut s = BTreeSet::from([nodes[rng.gen_range(0..nodes.len())]]);
    while s.len() < size {
        let frontier: Vec<NodeId> = match g.ball(&s, 1) {
            Ok(b) => b.difference(&s).copied().collect(),
            Err(_) => break,
        };
        if frontier.is_empty() {
            break;
        }
        s.insert(frontier[rng.gen_range(0..frontier.len())]);
    }
    s
}

fn inferable_suite(rng: &mut ChaCha8Rng) -> Vec<LemmaReport> {
    let cases: Vec<(LabeledGraph, u32, usize)> = vec![
        (grid(5, 5), 2, 0),
        (TriangularGridHost::build(4).expect("tri").graph().clone(), 3, 1),
        (KTreeHost::build(2, 8, AttachRule::Random, rng.gen()).expect("2-tree").graph().clone(), 3, 1),
        (KTreeHost::build(2, 10, AttachRule::Random, rng.gen()).expect("2-tree").graph().clone(), 3, 1),
        (LayeredHost::build(3, 4).expect("G_3").graph().clone(), 3, 3),
    ];
    let mut t = Tally::default();
    for (g, k, ell) in &cases {
        for _ in 0..30 {
            let sub = connected_sample(g, rng.gen_range(1..=6), rng);
            t.check(matches!(check_locally_inferable(g, *k, *ell, &sub), Ok(Inferability::Ok { .. })));
        }
    }
    let mut neg = Tally::default();
    let cycle = LabeledGraph::from_edges((1..=6).map(|i| (i, i % 6 + 1))).expect("cycle");
    let found = check_locally_inferable(&cycle, 3, 0, &BTreeSet::from([1, 2, 3]));
    neg.check(matches!(found, Ok(Inferability::Counterexample { .. })));
    vec![t.report("local_inferability"), neg.report("six_cycle_counterexample")]
}

fn clique_through_root(h: &LayeredHost, layers: u32, v: NodeId) -> Option<Vec<NodeId>> {
    let g = h.graph();
    if layers == 2 {
        let base = g.neighbors(v).iter().find(|&&x| h.layer(x) == Some(2))?;
        return Some(vec![v, *base]);
    }
    if h.layer(v) == Some(layers) {
        let mut c = clique_through_root(h, layers - 1, h.parent(v)?)?;
        c.push(v);
        Some(c)
    } else {
        let mut c = clique_through_root(h, layers - 1, v)?;
        c.push(h.size_through_layer(layers - 1) as NodeId + v);
        Some(c)
    }
}

fn layered_suite() -> Vec<LemmaReport> {
    let mut cliques = Tally::default();
    let mut edges = Tally::default();
    for (k, side) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
        let h = LayeredHost::build(k, side).expect("layered");
        let g = h.graph();
        for v in g.nodes() {
            let ok = clique_through_root(&h, k, v).is_some_and(|c| {
                c.len() == k as usize
                    && h.root(v).is_some_and(|r| c.contains(&r))
                    && c.iter().enumerate().all(|(i, &x)| c[i + 1..].iter().all(|&y| g.has_edge(x, y)))
            });
            cliques.check(ok);
        }
        for (u, v) in g.edges() {
            let ok = match (h.root(u), h.root(v)) {
                (Some(a), Some(b)) => a == b || g.has_edge(a, b),
                _ => false,
            };
            edges.check(ok);
        }
    }
    vec![cliques.report("layered_root_clique"), edges.report("layered_root_edges")]
}

/// Runs `suite`; every lemma reports how many instances it checked.
pub fn run(suite: Suite, seed: u64) -> Vec<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if matches!(suite, Suite::Bvalue | Suite::All) {
        out.push(antisymmetry());
        out.push(length_bound(&mut rng));
        out.extend(grid_cycles_and_paths());
        out.push(odd_rows());
    }
    if matches!(suite, Suite::Gadget | Suite::All) {
        out.extend(gadget_suite());
    }
    if matches!(suite, Suite::Inferable | Suite::All) {
        out.extend(inferable_suite(&mut rng));
    }
    if matches!(suite, Suite::Layered | Suite::All) {
        out.extend(layered_suite());
    }
    out
}
