use std::collections::BTreeSet;

use colorlab::analysis::enumerate_colorings;
use colorlab::graph_core::is_proper;
use colorlab::topologies::{
    GadgetChainHost, GridGeometry, GridHost, HostGraph, ImplicitGridHost, LayeredHost, TriangularGridHost,
};
use colorlab::{Coloring, LabeledGraph, NodeId};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = LabeledGraph> {
    (2u64..14).prop_flat_map(|n| {
        prop::collection::vec((1..=n, 1..=n), 0..30).prop_map(move |pairs| {
            let mut g = LabeledGraph::new();
            for v in 1..=n {
                g.add_node(v);
            }
            for (u, v) in pairs {
                if u != v {
                    g.add_edge(u, v).unwrap();
                }
            }
            g
        })
    })
}

proptest! {
    #[test]
    fn balls_grow_with_radius(g in arb_graph(), seeds in prop::collection::btree_set(1u64..14, 1..4), r in 0usize..5) {
        let s: BTreeSet<NodeId> = seeds.into_iter().filter(|v| g.contains(*v)).collect();
        prop_assume!(!s.is_empty());
        let small = g.ball(&s, r).unwrap();
        let big = g.ball(&s, r + 1).unwrap();
        prop_assert!(small.is_subset(&big));
        prop_assert_eq!(g.ball(&s, 0).unwrap(), s);
    }

    #[test]
    fn inducing_on_all_nodes_is_identity(g in arb_graph()) {
        let all = g.node_set();
        prop_assert!(colorlab::graph_core::views_equal(&g.induced_subgraph(&all).unwrap(), &g));
    }

    #[test]
    fn grid_edge_counts(a in 1u64..=10, b in 1u64..=10) {
        let simple = a * (b - 1) + b * (a - 1);
        let g = GridHost::build(a, b, false, false).unwrap().graph();
        prop_assert_eq!(g.node_count() as u64, a * b);
        prop_assert_eq!(g.edge_count() as u64, simple);
        let cyl = GridHost::build(a, b, false, true).unwrap().graph();
        let extra_cols = if b >= 3 { a } else { 0 };
        prop_assert_eq!(cyl.edge_count() as u64, simple + extra_cols);
        let torus = GridHost::build(a, b, true, true).unwrap().graph();
        let extra_rows = if a >= 3 { b } else { 0 };
        prop_assert_eq!(torus.edge_count() as u64, simple + extra_cols + extra_rows);
    }

    #[test]
    fn implicit_grid_matches_materialized(cells in prop::collection::vec((1u64..=20, 1u64..=20), 1..6), r in 0usize..4) {
        let concrete = GridHost::build(20, 20, false, false).unwrap();
        let mut implicit = ImplicitGridHost::new(20, 20).unwrap();
        for i in 1..=20 {
            for j in 1..=20 {
                implicit.bind(concrete.id_at(i, j).unwrap(), i, j).unwrap();
            }
        }
        let positions: Vec<u64> = cells
            .iter()
            .map(|&(i, j)| concrete.position_of(concrete.id_at(i, j).unwrap()).unwrap())
            .collect();
        prop_assert_eq!(
            colorlab::topologies::host_ball(&concrete, &positions, r),
            colorlab::topologies::host_ball(&implicit, &positions, r)
        );
        for &(i, j) in &cells {
            let mut a = concrete.coord_neighbors(i, j);
            let mut b = implicit.coord_neighbors(i, j);
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
        let g = concrete.graph();
        let ids: BTreeSet<NodeId> = cells.iter().map(|&(i, j)| concrete.id_at(i, j).unwrap()).collect();
        let ball = g.ball(&ids, r).unwrap();
        let by_coords: BTreeSet<NodeId> = cells
            .iter()
            .flat_map(|&c| implicit.ball_coords(c, r as u64))
            .map(|(i, j)| implicit.id_at(i, j).unwrap())
            .collect();
        prop_assert_eq!(ball, by_coords);
    }
}

#[test]
fn enumerated_colorings_are_proper() {
    for g in [
        GridHost::build(3, 3, false, false).unwrap().graph(),
        TriangularGridHost::build(3).unwrap().graph().clone(),
        GadgetChainHost::build(2, 3).unwrap().graph(),
    ] {
        let e = enumerate_colorings(&g, 4, 2_000);
        assert!(!e.colorings.is_empty());
        for c in &e.colorings {
            assert!(is_proper(&g, c).is_ok());
        }
    }
}

#[test]
fn triangular_nodes_lie_on_triangles() {
    for d in 1..=8 {
        let host = TriangularGridHost::build(d).unwrap();
        let g = host.graph();
        for v in g.nodes() {
            let nb = g.neighbors(v);
            let on_triangle = nb.iter().any(|&x| nb.iter().any(|&y| x < y && g.has_edge(x, y)));
            assert!(on_triangle, "d={d}, node {v}");
        }
    }
}

#[test]
fn row_coloring_of_gadget_chains_is_proper() {
    for k in 2..=4 {
        let chain = GadgetChainHost::build(k, 5).unwrap();
        let col: Coloring = chain.embedding().map(|(id, (_, i, _))| (id, i as u32)).collect();
        assert!(is_proper(&chain.graph(), &col).is_ok());
    }
}

fn is_clique(g: &LabeledGraph, s: &[NodeId]) -> bool {
    s.iter().enumerate().all(|(a, &x)| s[a + 1..].iter().all(|&y| g.has_edge(x, y)))
}

/// A k-clique through `v` and its base ancestor, built as in the inductive proof.
fn clique_through_root(h: &LayeredHost, layers: u32, v: NodeId) -> Vec<NodeId> {
    let g = h.graph();
    let dup_offset = |t: u32| h.size_through_layer(t - 1) as NodeId;
    let mut clique = if layers == 2 {
        let base = g.neighbors(v).iter().find(|&&x| h.layer(x) == Some(2)).unwrap();
        vec![v, *base]
    } else if h.layer(v) == Some(layers) {
        let mut c = clique_through_root(h, layers - 1, h.parent(v).unwrap());
        c.push(v);
        c
    } else {
        let mut c = clique_through_root(h, layers - 1, v);
        c.push(dup_offset(layers) + v);
        c
    };
    clique.sort_unstable();
    clique
}

#[test]
fn layered_roots_share_cliques_and_edges() {
    for (k, side) in [(3, 3), (3, 4), (4, 3)] {
        let h = LayeredHost::build(k, side).unwrap();
        let g = h.graph();
        assert_eq!(g.node_count(), (side * side) as usize * (1 << (k - 2)));
        for v in g.nodes() {
            let c = clique_through_root(&h, k, v);
            assert_eq!(c.len(), k as usize);
            assert!(is_clique(g, &c), "k={k}, node {v}: {c:?}");
            assert!(c.contains(&h.root(v).unwrap()));
        }
        for (u, v) in g.edges() {
            let (ru, rv) = (h.root(u).unwrap(), h.root(v).unwrap());
            // A node and its own duplicate share the base ancestor.
            assert!(ru == rv || g.has_edge(ru, rv), "k={k}, edge {u}-{v}");
        }
    }
}

