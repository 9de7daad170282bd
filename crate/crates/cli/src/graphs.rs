use clap::{Args, ValueEnum};
use colorlab::oracles::{OracleConfig, OracleFamily};
use colorlab::topologies::{AttachRule, GadgetChainHost, GridGeometry, GridHost, KTreeHost, LayeredHost, TriangularGridHost};
use colorlab::LabeledGraph;
use serde_json::{json, Value};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Grid,
    Cylinder,
    Torus,
    Tri,
    Ktree,
    Gadget,
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Attach {
    Path,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Grid side, or the base side of a layered graph.
    #[arg(long)]
    pub m: Option<u64>,
    /// Column count when it differs from --m.
    #[arg(long)]
    pub cols: Option<u64>,
    /// Triangular grid side.
    #[arg(long)]
    pub d: Option<u64>,
    /// Tree width for ktree, gadget size for gadget, layer count for layered,
    /// color count otherwise.
    #[arg(long)]
    pub k: Option<u64>,
    /// Node count of a k-tree.
    #[arg(long)]
    pub n: Option<usize>,
    /// Gadget count of a gadget chain.
    #[arg(long)]
    pub nprime: Option<u64>,
    #[arg(long, value_enum, default_value = "random")]
    pub attach: Attach,
}

pub struct Built {
    pub graph: LabeledGraph,
    pub coords: Value,
    pub params: Value,
}

fn need<T>(v: Option<T>, flag: &str, family: Family) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {family:?}")))
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn entries<I: IntoIterator<Item = (u64, Value)>>(it: I) -> Value {
    let mut v: Vec<(u64, Value)> = it.into_iter().collect();
    v.sort_by_key(|e| e.0);
    Value::Array(v.into_iter().map(|(id, c)| json!({ "id": id, "coord": c })).collect())
}

fn grid(a: u64, b: u64, wrap_rows: bool, wrap_cols: bool) -> Result<Built, Failure> {
    let host = GridHost::build(a, b, wrap_rows, wrap_cols).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Built {
        graph: host.graph(),
        coords: entries(host.embedding().map(|(id, (i, j))| (id, json!([i, j])))),
        params: json!({ "rows": a, "cols": b, "wrap_rows": wrap_rows, "wrap_cols": wrap_cols }),
    })
}

/// Builds a host of `family`. `seed` drives random k-tree attachment.
pub fn build(family: Family, a: &GraphArgs, seed: u64) -> Result<Built, Failure> {
    let usage = |e: colorlab::topologies::TopologyError| Failure::Usage(e.to_string());
    match family {
        Family::Grid | Family::Cylinder | Family::Torus => {
            let m = need(a.m, "m", family)?;
            let cols = a.cols.unwrap_or(m);
            grid(m, cols, family == Family::Torus, family != Family::Grid)
        }
        Family::Tri => {
            let d = need(a.d, "d", family)?;
            let host = TriangularGridHost::build(d).map_err(usage)?;
            let coords = entries(host.graph().nodes().map(|id| (id, json!(host.coord_of(id)))));
            Ok(Built {
                graph: host.graph().clone(),
                coords,
                params: json!({ "d": d }),
            })
        }
        Family::Ktree => {
            let k = a.k.unwrap_or(2) as usize;
            let n = need(a.n, "n", family)?;
            let rule = match a.attach {
                Attach::Path => AttachRule::Path,
                Attach::Random => AttachRule::Random,
            };
            let host = KTreeHost::build(k, n, rule, seed).map_err(usage)?;
            let coords = entries(
                host.graph()
                    .nodes()
                    .map(|id| (id, json!({ "attached_to": host.attachment(id) }))),
            );
            Ok(Built {
                graph: host.graph().clone(),
                coords,
                params: json!({ "k": k, "n": n, "attach": rule, "seed": seed }),
            })
        }
        Family::Gadget => {
            let k = a.k.unwrap_or(3);
            let np = need(a.nprime, "nprime", family)?;
            let host = GadgetChainHost::build(k, np).map_err(usage)?;
            Ok(Built {
                graph: host.graph(),
                coords: entries(host.embedding().map(|(id, (l, i, j))| (id, json!([l, i, j])))),
                params: json!({ "k": k, "nprime": np }),
            })
        }
        Family::Layered => {
            let k = a.k.unwrap_or(3) as u32;
            let m = need(a.m, "m", family)?;
            let host = LayeredHost::build(k, m).map_err(usage)?;
            let coords = entries(host.graph().nodes().map(|id| {
                let c = json!({
                    "layer": host.layer(id),
                    "parent": host.parent(id),
                    "root": host.root(id),
                    "base": host.root(id).and_then(|r| host.base().coord_of(r)),
                });
                (id, c)
            }));
            Ok(Built {
                graph: host.graph().clone(),
                coords,
                params: json!({ "k": k, "m": m }),
            })
        }
    }
}

/// Oracle the upper-bound algorithm uses on `family`.
pub fn oracle_for(family: Family, a: &GraphArgs) -> Result<OracleConfig, Failure> {
    let fixed = |want: u64, fam: OracleFamily| match a.k {
        Some(k) if k != want => Err(Failure::Usage(format!("{family:?} is {want}-colorable; got --k {k}"))),
        _ => Ok(OracleConfig::for_family(fam, want as u32)),
    };
    match family {
        Family::Grid => fixed(2, OracleFamily::Bipartite),
        Family::Tri => fixed(3, OracleFamily::Triangular),
        Family::Ktree => Ok(OracleConfig::for_family(OracleFamily::Ktree, a.k.unwrap_or(2) as u32 + 1)),
        Family::Layered => Ok(OracleConfig::for_family(OracleFamily::Layered, a.k.unwrap_or(3) as u32)),
        other => Err(Failure::Usage(format!("run-upper does not support {other:?}"))),
    }
    .and_then(|cfg| cfg.validate().map(|()| cfg).map_err(runtime))
}
