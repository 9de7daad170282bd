use std::collections::BTreeMap;

use clap::{Args, ValueEnum};
use colorlab::adversaries::{
    build_bvalue_path, gadget_adversary, grid_rectangle_adversary, torus_two_row_adversary, Baseline, RowStriping,
};
use colorlab::engine::{orders, AdversaryError, EngineError, run_game_concrete, LazyGame, LossReason, OnlineAlgorithm, Verdict};
use colorlab::analysis::Certificate;
use colorlab::graph_core::is_proper;
use colorlab::oracles::{OracleConfig, OracleFamily};
use colorlab::unify_color::{default_t, UnifyColor};
use colorlab::{Color, LabeledGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::graphs::{self, Family, GraphArgs};
use crate::Failure;

#[derive(Debug, Clone, Args)]
pub struct UpperArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Number of shuffled reveal orders to play.
    #[arg(long, default_value_t = 1)]
    pub orders: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Inner locality; defaults to 3(k-1)·⌈log2 n⌉.
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Verify the group invariants after every reveal.
    #[arg(long)]
    pub checked: bool,
}

fn histogram(alg: &UnifyColor, g: &LabeledGraph) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for v in g.nodes() {
        *h.entry(alg.type_changes(v)).or_insert(0) += 1;
    }
    h.into_iter().map(|(k, n)| (k.to_string(), n)).collect()
}

fn one_game(g: &LabeledGraph, cfg: OracleConfig, t: usize, checked: bool, id: usize, seed: u64) -> Result<(Value, bool), String> {
    let n = g.node_count();
    let mut alg = UnifyColor::with_t(cfg, n, t).map_err(|e| e.to_string())?;
    if checked {
        alg = alg.checked();
    }
    let locality = alg.locality();
    let order = orders::shuffled(g, seed);
    let game = run_game_concrete(g, &order, &mut alg, locality).map_err(|e| e.to_string())?;
    let col = &game.transcript.coloring;
    let mut max_ball = 0;
    for &v in &order {
        max_ball = max_ball.max(g.ball_of(v, locality).map_err(|e| e.to_string())?.len());
    }
    let within_budget = alg.stats().max_type_changes <= alg.log_n();
    let proper = is_proper(g, col).is_ok() && col.len() == n;
    let won = game.result.verdict == Verdict::AlgorithmWins && proper && within_budget;
    let report = json!({
        "game": id,
        "order_seed": seed,
        "verdict": game.result.verdict,
        "audit": game.result.audit,
        "reveals": game.transcript.steps.len(),
        "max_ball_size": max_ball,
        "colors_used": col.max_color(),
        "proper": proper,
        "max_type_changes": alg.stats().max_type_changes,
        "type_change_budget": alg.log_n(),
        "type_change_histogram": histogram(&alg, g),
        "stats": alg.stats(),
    });
    Ok((report, won))
}

pub fn run_upper(a: &UpperArgs) -> Result<(Value, bool), Failure> {
    if a.orders == 0 {
        return Err(Failure::Usage("--orders must be positive".into()));
    }
    let cfg = graphs::oracle_for(a.family, &a.graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let host_seed: u64 = rng.gen();
    let seeds: Vec<u64> = (0..a.orders).map(|_| rng.gen()).collect();
    let built = graphs::build(a.family, &a.graph, host_seed)?;
    let g = &built.graph;
    let t = a.t.unwrap_or_else(|| default_t(cfg.k, g.node_count()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let games: Vec<(Value, bool)> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(id, &s)| one_game(g, cfg, t, a.checked, id, s))
            .collect::<Result<_, _>>()
    })
    .map_err(Failure::Runtime)?;
    let wins = games.iter().filter(|(_, w)| *w).count();
    let report = json!({
        "family": format!("{:?}", a.family).to_lowercase(),
        "graph": built.params,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "oracle": cfg,
        "T": t,
        "locality": t + cfg.ell,
        "palette": cfg.k + 1,
        "seed": a.seed,
        "games": games.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>(),
        "wins": wins,
        "orders": a.orders,
    });
    Ok((report, wins == a.orders))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Bpath,
    Rectangle,
    Torus,
    Gadget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum AlgName {
    GreedyFirstFit,
    FixedPattern,
    Stubborn,
    RowStriping,
    Unify,
}

#[derive(Debug, Clone, Args)]
pub struct AdversaryArgs {
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    #[arg(long = "alg", value_enum)]
    pub alg: AlgName,
    #[arg(long = "T", default_value_t = 1)]
    pub t: usize,
    /// b-value target for bpath and rectangle, gadget size for gadget.
    #[arg(long)]
    pub k: Option<u64>,
    /// Torus side; must be odd.
    #[arg(long)]
    pub side: Option<u64>,
    /// Gadget count.
    #[arg(long)]
    pub nprime: Option<u64>,
    /// Palette of the baseline algorithm.
    #[arg(long)]
    pub palette: Option<Color>,
    /// Host size the unify algorithm assumes.
    #[arg(long, default_value_t = 1 << 20)]
    pub n: usize,
    /// Transcript file.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn algorithm(a: &AdversaryArgs) -> Result<Box<dyn OnlineAlgorithm>, Failure> {
    let gadget_k = a.k.unwrap_or(3);
    let default_palette = match a.strategy {
        Strategy::Gadget => (2 * gadget_k).saturating_sub(2).max(1) as Color,
        _ => 3,
    };
    let palette = a.palette.unwrap_or(default_palette);
    Ok(match a.alg {
        AlgName::GreedyFirstFit => Baseline::GreedyFirstFit.build(palette),
        AlgName::FixedPattern => Baseline::FixedPattern.build(palette),
        AlgName::Stubborn => Baseline::Stubborn.build(palette),
        AlgName::RowStriping => match a.strategy {
            Strategy::Gadget => Box::new(RowStriping::new(gadget_k)),
            _ => Box::new(RowStriping::new(2)),
        },
        AlgName::Unify => {
            if a.strategy == Strategy::Gadget {
                return Err(Failure::Usage("unify needs a grid strategy".into()));
            }
            let cfg = OracleConfig::for_family(OracleFamily::Bipartite, 2);
            Box::new(UnifyColor::with_t(cfg, a.n, a.t).map_err(|e| Failure::Runtime(e.to_string()))?)
        }
    })
}

fn b_values(game: &LazyGame) -> Value {
    match game.result.verdict.certificate() {
        Some(Certificate::GridCycle(c)) => json!({ "cycle": c.b }),
        Some(Certificate::TorusPair(c)) => json!({ "b1": c.b1, "b2": c.b2 }),
        _ => Value::Null,
    }
}

pub fn run_adversary(a: &AdversaryArgs) -> Result<(Value, bool), Failure> {
    let mut alg = algorithm(a)?;
    let t = a.t;
    let engine = |e: EngineError| match e {
        EngineError::Adversary(AdversaryError::Precondition(why)) => Failure::Usage(why),
        other => Failure::Runtime(other.to_string()),
    };
    let mut extra = json!({});
    let (game, params) = match a.strategy {
        Strategy::Bpath => {
            let target = a.k.unwrap_or(2) as u32;
            let run = build_bvalue_path(alg.as_mut(), t, target).map_err(engine)?;
            if let Some(r) = &run.region {
                extra = json!({ "path_b": r.b, "region_length": r.region_length, "path_length": r.path.len() });
            }
            (run.game, json!({ "target": target }))
        }
        Strategy::Rectangle => {
            let target = a.k.map_or(4 * t as u32 + 5, |k| k as u32);
            (grid_rectangle_adversary(alg.as_mut(), t, target).map_err(engine)?, json!({ "target": target }))
        }
        Strategy::Torus => {
            let side = a.side.unwrap_or(4 * t as u64 + 5);
            (torus_two_row_adversary(alg.as_mut(), t, side).map_err(engine)?, json!({ "side": side }))
        }
        Strategy::Gadget => {
            let k = a.k.unwrap_or(3);
            let np = a.nprime.unwrap_or(2 * t as u64 + 3);
            (gadget_adversary(alg.as_mut(), t, k, np).map_err(engine)?, json!({ "k": k, "nprime": np }))
        }
    };
    if let Some(path) = &a.out {
        let file = std::fs::File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        game.transcript
            .write_json(Some(&game.result), std::io::BufWriter::new(file))
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let audit_ok = game.result.audit.is_ok();
    let expected = audit_ok
        && match &game.result.verdict {
            Verdict::AlgorithmLoses {
                reason: LossReason::Certificate { .. } | LossReason::MonochromaticEdge { .. },
            } => true,
            _ if a.strategy == Strategy::Bpath => extra["path_b"].as_i64().is_some_and(|b| b >= params["target"].as_i64().unwrap_or(0)),
            _ => false,
        };
    let report = json!({
        "strategy": format!("{:?}", a.strategy).to_lowercase(),
        "algorithm": game.transcript.algorithm,
        "palette": game.transcript.palette,
        "T": t,
        "params": params,
        "verdict": game.result.verdict,
        "audit": game.result.audit,
        "certificate_kind": game.result.verdict.certificate().map(|c| c.kind()),
        "certificate_rejected": game.result.certificate_rejected,
        "b_values": b_values(&game),
        "reveals": game.transcript.steps.len(),
        "view_nodes": game.transcript.final_view().node_count(),
        "details": game.details,
        "path": extra,
        "expected_outcome": expected,
    });
    Ok((report, expected))
}
