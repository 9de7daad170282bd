use colorlab::adversaries::{FixedPattern, GreedyFirstFit};
use colorlab::engine::{audit_full, audit_transcript, orders, replay_matches, run_game_concrete, Audit};
use colorlab::oracles::{OracleConfig, OracleFamily};
use colorlab::topologies::{GridHost, TriangularGridHost};
use colorlab::unify_color::UnifyColor;
use colorlab::LabeledGraph;
use proptest::prelude::*;

fn host(pick: u8) -> (LabeledGraph, OracleConfig) {
    if pick.is_multiple_of(2) {
        (
            GridHost::build(5, 6, false, false).unwrap().graph(),
            OracleConfig::for_family(OracleFamily::Bipartite, 2),
        )
    } else {
        (
            TriangularGridHost::build(5).unwrap().graph().clone(),
            OracleConfig::for_family(OracleFamily::Triangular, 3),
        )
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replays_are_deterministic(pick in 0u8..2, seed in 0u64..1_000, t in 1usize..4) {
        let (g, cfg) = host(pick);
        let order = orders::shuffled(&g, seed);
        let make = || UnifyColor::with_t(cfg, g.node_count(), t).unwrap();
        let t_total = make().locality();
        let a = run_game_concrete(&g, &order, &mut make(), t_total).unwrap();
        let b = run_game_concrete(&g, &order, &mut make(), t_total).unwrap();
        prop_assert_eq!(a.transcript.to_json_string(Some(&a.result)), b.transcript.to_json_string(Some(&b.result)));
        prop_assert!(replay_matches(&a.transcript, &mut make()));
    }

    #[test]
    fn views_only_grow(pick in 0u8..2, seed in 0u64..1_000, t in 0usize..3) {
        let (g, _) = host(pick);
        let order = orders::shuffled(&g, seed);
        let game = run_game_concrete(&g, &order, &mut GreedyFirstFit::new(4), t).unwrap();
        let views: Vec<LabeledGraph> = game.transcript.views().collect();
        for w in views.windows(2) {
            prop_assert!(w[0].nodes().all(|v| w[1].contains(v)));
            prop_assert!(w[0].edges().all(|(u, v)| w[1].has_edge(u, v)));
        }
        prop_assert!(game.transcript.steps.iter().all(|s| s.is_monotone()));
        prop_assert_eq!(audit_full(&game.transcript, &g), Audit::Ok);
        prop_assert_eq!(audit_transcript(&game.transcript, &g), Audit::Ok);
        prop_assert!(replay_matches(&game.transcript, &mut GreedyFirstFit::new(4)));
    }
}

#[test]
fn replay_detects_a_different_algorithm() {
    let (g, _) = host(0);
    let order = orders::by_id(&g);
    let game = run_game_concrete(&g, &order, &mut GreedyFirstFit::new(3), 1).unwrap();
    assert!(!replay_matches(&game.transcript, &mut FixedPattern::new(3)));
}

#[test]
fn corrupting_one_served_edge_fails_audit_at_that_step() {
    let (g, _) = host(1);
    let game = run_game_concrete(&g, &orders::shuffled(&g, 7), &mut GreedyFirstFit::new(4), 1).unwrap();
    let mut t = game.transcript.clone();
    let idx = t.steps.iter().position(|s| !s.added_edges.is_empty()).unwrap();
    t.steps[idx].added_edges.pop();
    let expect = t.steps[idx].i;
    assert!(matches!(audit_transcript(&t, &g), Audit::Violation { step, .. } if step == expect));
    assert!(matches!(audit_full(&t, &g), Audit::Violation { step, .. } if step == expect));
}
